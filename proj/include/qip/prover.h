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

#ifndef QIP_PROVER_H
#define QIP_PROVER_H

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "qip/linalg.h"
#include "qip/qfa.h"

namespace qip {

/// Prover tape contents: one byte per cell, 0 is the blank, trailing blanks are always stripped.
using Tape = std::string;

void strip_tape(Tape &t);

struct ProverOut {
    int cell;
    Tape tape;
    cd amp;
};

/// One round of prover action on (communication cell, private tape). Implementations must be unitary on the
/// states they can reach from the blank tape.
class ProverStrategy {
   public:
    virtual ~ProverStrategy() = default;
    /// Appends the image of basis state |cell, tape> at the given round (rounds start at 1).
    virtual void apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const = 0;
    virtual std::string describe() const = 0;
    /// Tape cells touched in dense mode; 0 for sparse strategies.
    virtual int dense_cells() const {
        return 0;
    }
};

using ProverPtr = std::shared_ptr<const ProverStrategy>;

class IdentityProver : public ProverStrategy {
   public:
    void apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const override;
    std::string describe() const override;
};

/// Deterministic table (round, cell, memory) -> (cell, memory). The memory lives in tape cell 0.
struct ClassicalTable {
    int num_cells = 1;
    int memory_states = 1;
    std::map<std::tuple<int, int, int>, std::pair<int, int>> entries;
    /// When false a round that is not injective is a ReversibilityError. When true such a round appends a
    /// history symbol after the memory cell so the overall map stays injective.
    bool allow_recording = false;

    void set(int round, int cell, int mem, int cell2, int mem2) {
        entries[{round, cell, mem}] = {cell2, mem2};
    }
};

class ClassicalProver : public ProverStrategy {
   public:
    explicit ClassicalProver(ClassicalTable table);
    void apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const override;
    std::string describe() const override;

    const ClassicalTable &table() const {
        return table_;
    }
    /// Completed permutation for a round (identity for rounds without entries), indexed cell * M + mem.
    const std::vector<std::pair<int, int>> &round_map(int round) const;
    bool records(int round) const;
    int last_round() const {
        return last_round_;
    }

   private:
    ClassicalTable table_;
    std::map<int, std::vector<std::pair<int, int>>> maps_;
    std::map<int, bool> recording_;
    std::vector<std::pair<int, int>> identity_;
    int last_round_ = 0;
};

/// Returns # for every received symbol and pushes an encoding of the symbol onto the tape.
class EraserProver : public ProverStrategy {
   public:
    void apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const override;
    std::string describe() const override;
};

/// Classical prover that answers from the full history of received symbols; the history is kept on the tape.
class HistoryProver : public ProverStrategy {
   public:
    using Decide = std::function<int(int round, int cell, const Tape &history)>;
    HistoryProver(Decide decide, std::string label);
    void apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const override;
    std::string describe() const override;

   private:
    Decide decide_;
    std::string label_;
};

/// Arbitrary strategy given by a callback. Used for composite and test strategies.
class FunctionProver : public ProverStrategy {
   public:
    using Fn = std::function<void(int, int, const Tape &, std::vector<ProverOut> &)>;
    FunctionProver(Fn fn, std::string label);
    void apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const override;
    std::string describe() const override;

   private:
    Fn fn_;
    std::string label_;
};

/// Bounded-tape strategy: per-round unitaries on cell (x) c tape cells over an alphabet of size tape_alphabet.
/// Basis index is cell * tape_alphabet^c + sum_j tape[j] * tape_alphabet^(c - 1 - j). Rounds past the list act
/// as the identity.
class DenseProver : public ProverStrategy {
   public:
    DenseProver(int num_cells, int tape_alphabet, int c, std::vector<DenseOperator> rounds);
    void apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const override;
    std::string describe() const override;
    int dense_cells() const override {
        return c_;
    }
    int dimension() const {
        return dim_;
    }
    int tape_alphabet() const {
        return dlt_;
    }
    int num_cells() const {
        return nc_;
    }
    const std::vector<DenseOperator> &rounds() const {
        return rounds_;
    }
    int64_t encode(int cell, const Tape &tape) const;
    void decode(int64_t index, int &cell, Tape &tape) const;

   private:
    int nc_;
    int dlt_;
    int c_;
    int dim_;
    std::vector<DenseOperator> rounds_;
};

/// Dense form (one tape cell over the memory alphabet) of a classical table without recording.
std::shared_ptr<DenseProver> densify(const ClassicalProver &p);

/// True when, for every round up to i_max and every tape reachable from the blank tape, the blank cell is mapped
/// only to blank-cell states. Reachable tapes are collected over all cell symbols. Throws CapacityError when the
/// reachable set exceeds max_tapes.
bool check_committed(const ProverStrategy &p, int num_cells, int i_max, size_t max_tapes = 1 << 16);

/// Largest deviation from orthonormality of the round map on the given basis states.
double reachable_unitarity_defect(const ProverStrategy &p, int round, const std::vector<std::pair<int, Tape>> &basis);

/// Text format:
///   prover identity
/// or
///   prover classical
///   memory M
///   [record]
///   entry ROUND CELL MEM : CELL2 MEM2
ProverPtr parse_prover(const std::string &text, const QfaSpec &spec);
ProverPtr load_prover_file(const std::string &path, const QfaSpec &spec);
std::string serialize_classical(const ClassicalTable &t, const QfaSpec &spec);

}  // namespace qip

#endif
