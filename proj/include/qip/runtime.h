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

#ifndef QIP_RUNTIME_H
#define QIP_RUNTIME_H

#include <functional>
#include <string>
#include <vector>

#include "qip/prover.h"
#include "qip/qfa.h"

namespace qip {

/// Global configuration: verifier state, head position, communication cell, prover tape.
struct Config {
    int q = 0;
    int k = 0;
    int cell = 0;
    Tape tape;

    bool operator<(const Config &o) const {
        if (q != o.q) {
            return q < o.q;
        }
        if (k != o.k) {
            return k < o.k;
        }
        if (cell != o.cell) {
            return cell < o.cell;
        }
        return tape < o.tape;
    }
    bool operator==(const Config &o) const {
        return q == o.q && k == o.k && cell == o.cell && tape == o.tape;
    }
};

using JointState = SparseVector<Config>;

struct QipSystem {
    std::string name;
    /// Completed verifier, and the table as written before completion.
    QfaSpec verifier;
    QfaSpec source;
    /// Honest strategy for a given input.
    std::function<ProverPtr(const std::string &)> honest;
    std::function<bool(const std::string &)> member;
    bool is_public = false;
    bool measure_once = false;
    bool interaction_bounded = false;
    /// True when the honest strategy only permutes basis states.
    bool classical_honest = true;
    double completeness = 1;
    double soundness = 1;
    std::vector<StructureMode> structure_modes;

    ProverPtr honest_prover(const std::string &x) const;
};

struct HaltRecord {
    int round;
    double acc;
    double rej;
};

struct RunResult {
    double p_acc = 0;
    double p_rej = 0;
    double p_cont = 0;
    std::vector<HaltRecord> halting_profile;
    int rounds_executed = 0;
    bool truncated = false;
    /// Largest |p_acc + p_rej + |continuation|^2 - 1| observed after any round.
    double max_conservation_error = 0;
};

/// Incremental evolution of the joint state for a fixed verifier and input.
class Evolution {
   public:
    Evolution(const QfaSpec &spec, const std::string &x);

    /// Applies the verifier's step operator. With measure set the halting parts are then measured away.
    void verifier_step(bool measure = true);
    /// Projects away the halting parts, accumulating their mass into the totals.
    void measure();
    /// Applies the prover's action for the current round.
    void prover_step(const ProverStrategy &p);

    int round() const {
        return round_;
    }
    double p_acc() const {
        return p_acc_;
    }
    double p_rej() const {
        return p_rej_;
    }
    double continuation() const {
        return psi_.norm2();
    }
    double conservation_error() const;
    const JointState &state() const {
        return psi_;
    }
    JointState &state() {
        return psi_;
    }
    const std::vector<HaltRecord> &profile() const {
        return profile_;
    }
    const QfaSpec &spec() const {
        return spec_;
    }
    int width() const {
        return width_;
    }
    const std::vector<Move> *column(int q, int k, int cell) const;

   private:
    const QfaSpec &spec_;
    std::string x_;
    int width_;
    int ns_;
    int nc_;
    std::vector<int> symbol_at_;
    std::vector<const std::vector<Move> *> table_;
    JointState psi_;
    int round_ = 0;
    double p_acc_ = 0;
    double p_rej_ = 0;
    std::vector<HaltRecord> profile_;
};

int64_t default_t_max(const std::string &x);

/// t_max <= 0 selects the default of 20 (|x|+2)^2 rounds.
RunResult run(const QipSystem &system, const ProverStrategy &prover, const std::string &x, int64_t t_max = 0);
RunResult run_spec(const QfaSpec &spec, const ProverStrategy &prover, const std::string &x, int64_t t_max = 0);

struct HaltingTime {
    double value = 0;
    bool upper_bound_known = false;
};

HaltingTime expected_halting_time(const QipSystem &system, const ProverStrategy &prover, const std::string &x,
                                  int64_t t_max = 0);

/// Largest number of query configurations along any computation path. Throws ContractError when the prover is
/// not committed over the rounds the run needs.
int count_interactions(const QipSystem &system, const ProverStrategy &prover, const std::string &x,
                       int64_t t_max = 0);

/// Squared amplitude of query configurations met while the head reads y, in the run on prefix + y where after
/// every measurement the cell is also projected onto the blank. One-way verifiers only.
double query_weight(const QfaSpec &spec, const std::string &prefix, const std::string &y);

}  // namespace qip

#endif
