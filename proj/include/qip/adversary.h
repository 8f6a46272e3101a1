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

#ifndef QIP_ADVERSARY_H
#define QIP_ADVERSARY_H

#include <cstdint>
#include <string>
#include <vector>

#include "qip/runtime.h"

namespace qip {

struct AdversaryBudget {
    int memory_states = 2;
    /// Rounds in which the adversary may act; later rounds are the identity. 0 means every round.
    int steps = 0;
    int restarts = 50;
    int iterations = 200;
    uint64_t seed = 1;
    /// Search nodes visited by the classical enumeration before it gives up.
    int64_t node_cap = 2000000;
    /// Largest prover dimension |cells| * |tape alphabet|^c accepted by the quantum search.
    int max_dim = 64;
    /// Tape alphabet size for the quantum search; 0 picks max(|cells|, memory_states).
    int tape_alphabet = 0;
    int64_t t_max = 0;
};

/// Parameters of one quantum restart: per round, the base permutation (identity or a classical seed) and the
/// rotation and phase angles applied after it.
struct QuantumStrategy {
    int num_cells = 1;
    int tape_alphabet = 1;
    int c = 1;
    std::vector<std::vector<int>> base;
    std::vector<std::vector<double>> params;

    int dimension() const;
    /// Round unitary: phases * rotations * base permutation.
    DenseOperator round_unitary(int round) const;
    std::shared_ptr<DenseProver> prover() const;
};

struct AdversaryReport {
    double best_p_acc = 0;
    std::string best_strategy;
    ProverPtr strategy;
    int64_t strategies_tested = 0;
    bool is_exhaustive = false;
    uint64_t seed = 0;
    int best_restart = -1;
    /// Set when the best strategy is a quantum restart.
    std::shared_ptr<QuantumStrategy> quantum;
    /// Set when the best strategy is a classical table.
    std::shared_ptr<ClassicalTable> classical;
};

/// Exhaustive search over classical tables (round, cell, memory) -> (cell, memory). A round whose choice is not
/// injective on the reachable pairs keeps a history record on the tape, so every deterministic strategy with the
/// given memory is covered. Ties keep the first strategy in enumeration order.
AdversaryReport best_classical_prover(const QipSystem &system, const std::string &x, const AdversaryBudget &budget);

/// Random restarts plus coordinate ascent over per-round unitaries on cell (x) c tape cells. The identity start
/// and, when it fits, the classical best are always in the pool.
AdversaryReport search_quantum_prover(const QipSystem &system, const std::string &x, int c,
                                      const AdversaryBudget &budget, const AdversaryReport *classical_seed = nullptr);

/// Fast acceptance probability of a bounded-tape strategy.
double evaluate_quantum(const QipSystem &system, const std::string &x, const QuantumStrategy &s, int64_t t_max = 0);

/// Strategies that rotate the communication symbol by a fixed shift at one round or at every round.
std::vector<ProverPtr> tampering_suite(const QipSystem &system, const std::string &x, int64_t t_max = 0);

struct SuiteResult {
    double max_p_acc = 0;
    std::string best;
    bool classical_exhaustive = false;
};

/// Maximum acceptance over identity, honest, tampering and classical enumeration; quantum search when asked.
SuiteResult adversary_suite(const QipSystem &system, const std::string &x, const AdversaryBudget &budget,
                            bool quantum);

}  // namespace qip

#endif
