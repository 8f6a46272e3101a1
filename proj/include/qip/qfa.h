// Copyright 2026 The qipsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QIP_QFA_H
#define QIP_QFA_H

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "qip/linalg.h"

namespace qip {

enum class HeadModel { MeasureOnce, OneWay, TwoWay };
enum class StateKind { NonHalting, Accepting, Rejecting };
enum class StructureMode { OneWayHalting, Public, MeasureOnce };

constexpr char kLeftEnd = '^';
constexpr char kRightEnd = '$';
constexpr const char *kBlank = "#";
constexpr int kNoDir = 99;

std::string head_model_name(HeadModel h);
HeadModel parse_head_model(const std::string &s);
std::string state_kind_name(StateKind k);

/// One outgoing amplitude of a transition column.
struct Move {
    int to = 0;
    int cell = 0;
    int dir = 1;
    cd amp{1, 0};
    bool completed = false;

    bool operator==(const Move &o) const {
        return to == o.to && cell == o.cell && dir == o.dir && amp == o.amp && completed == o.completed;
    }
};

/// Column key: (state, tape symbol, cell symbol). Tape symbol 0 is the left endmarker, the last one is the right
/// endmarker, and 1..|sigma| follow the order of input_alphabet.
using ColumnKey = std::tuple<int, int, int>;

struct QfaSpec {
    HeadModel head = HeadModel::TwoWay;
    std::string input_alphabet;
    std::vector<std::string> states;
    std::vector<StateKind> kinds;
    std::vector<int> dirs;
    int initial = 0;
    std::vector<std::string> cells{kBlank};
    std::vector<std::string> tape_symbols{kBlank};
    std::map<ColumnKey, std::vector<Move>> delta;

    int num_states() const {
        return static_cast<int>(states.size());
    }
    int num_cells() const {
        return static_cast<int>(cells.size());
    }
    int num_symbols() const {
        return static_cast<int>(input_alphabet.size()) + 2;
    }
    bool is_halting(int q) const {
        return kinds[q] != StateKind::NonHalting;
    }

    /// Index of a tape symbol character (endmarkers included). Throws AlphabetError.
    int symbol_index(char c) const;
    char symbol_char(int s) const;
    /// Tape symbol under head position k of the circular tape for input x.
    int symbol_at(const std::string &x, int k) const;
    void check_input(const std::string &x) const;

    int find_state(const std::string &name) const;
    int find_cell(const std::string &name) const;
    int state_index(const std::string &name) const;
    int cell_index(const std::string &name) const;

    int add_state(const std::string &name, StateKind kind, int dir = kNoDir);
    int add_cell(const std::string &name);
    void add_move(int q, int sym, int cell, const Move &m);

    bool operator==(const QfaSpec &o) const;
};

/// Name-based construction helper used by the protocol constructors.
class SpecBuilder {
   public:
    SpecBuilder(HeadModel head, std::string input_alphabet);

    /// Gets or creates a state. A dir other than kNoDir pins its head direction.
    int state(const std::string &name, StateKind kind = StateKind::NonHalting, int dir = kNoDir);
    int cell(const std::string &name);
    void set_initial(const std::string &name);

    /// Head direction taken from the target state's pinned direction.
    void on(const std::string &q, char sym, const std::string &cell, const std::string &q2, const std::string &cell2,
            cd amp = 1.0);
    void on_dir(const std::string &q, char sym, const std::string &cell, const std::string &q2,
                const std::string &cell2, int dir, cd amp = 1.0);

    QfaSpec &spec() {
        return spec_;
    }
    QfaSpec build() const {
        return spec_;
    }

   private:
    QfaSpec spec_;
};

struct Violation {
    std::string input;
    std::string description;
};

struct ValidationReport {
    std::map<int, bool> well_formed;
    std::vector<Violation> violations;
    int completed_transitions = 0;
    int fresh_states = 0;
    std::vector<std::string> notes;

    bool ok() const;
};

/// Dense step operator on basis (q, k, cell) ordered as ((q * (n + 2)) + k) * |cells| + cell.
DenseOperator build_step_operator(const QfaSpec &spec, const std::string &x, int64_t max_dim = 4096);
SparseOperator build_step_operator_sparse(const QfaSpec &spec, const std::string &x);

/// Fills unspecified columns so every per-symbol block is unitary. Unspecified columns of non-halting states go to
/// fresh rejecting states in index order; the remaining halting columns take the orthogonal complement.
std::pair<QfaSpec, ValidationReport> validate_and_complete(const QfaSpec &partial, const std::vector<int> &lengths,
                                                           double tol = kUnitaryTol);

/// Structural scans; findings go into the report rather than exceptions.
ValidationReport check_structure(const QfaSpec &spec, StructureMode mode, const std::vector<int> &lengths = {0, 1, 2, 3,
                                                                                                          4, 5, 6});

/// Cell symbol a public verifier must write when entering q with head move d.
std::string public_cell_name(const QfaSpec &spec, int q, int d);

/// Amplitude literal: decimal, P/Q, 1/sqrt(K), sqrt(K), i, exp(2*pi*i*J/N), products joined by '*', optional sign.
cd parse_amplitude(const std::string &text);

QfaSpec parse_spec(const std::string &text);
QfaSpec load_spec_file(const std::string &path);
std::string serialize_spec(const QfaSpec &spec);

}  // namespace qip

#endif
