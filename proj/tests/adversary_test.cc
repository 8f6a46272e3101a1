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

#include "qip/adversary.h"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "qip/errors.h"
#include "qip/protocols.h"

using namespace qip;

namespace {

std::vector<std::string> all_inputs(const std::string &alpha, int max_len) {
    std::vector<std::string> out{""};
    for (size_t i = 0; i < out.size(); ++i) {
        if (static_cast<int>(out[i].size()) < max_len) {
            for (char c : alpha) {
                out.push_back(out[i] + c);
            }
        }
    }
    return out;
}

/// Maximum over every memoryless table (rounds 1..rounds, all maps cell -> cell), with recording wherever a
/// round's map is not injective.
double brute_force_memoryless(const QipSystem &s, const std::string &x, int rounds) {
    const int nc = s.verifier.num_cells();
    int64_t per_round = 1;
    for (int i = 0; i < nc; ++i) {
        per_round *= nc;
    }
    int64_t total = 1;
    for (int r = 0; r < rounds; ++r) {
        total *= per_round;
    }
    double best = 0;
    for (int64_t code = 0; code < total; ++code) {
        ClassicalTable t;
        t.num_cells = nc;
        t.memory_states = 1;
        t.allow_recording = true;
        int64_t c = code;
        for (int r = 1; r <= rounds; ++r) {
            for (int g = 0; g < nc; ++g) {
                t.set(r, g, 0, static_cast<int>(c % nc), 0);
                c /= nc;
            }
        }
        best = std::max(best, run(s, ClassicalProver(t), x).p_acc);
    }
    return best;
}

}  // namespace

TEST(best_classical_prover, examples) {
    AdversaryBudget b;
    b.memory_states = 2;
    b.steps = 8;
    QipSystem pal = pal_sharp_protocol(1);
    AdversaryReport bad = best_classical_prover(pal, "0#1", b);
    EXPECT_LE(bad.best_p_acc, 0.5 + 1e-6);
    EXPECT_TRUE(bad.is_exhaustive);
    AdversaryReport good = best_classical_prover(pal, "0#0", b);
    EXPECT_NEAR(good.best_p_acc, 1.0, 1e-9);
    QipSystem zero = zero_public_protocol();
    EXPECT_NEAR(best_classical_prover(zero, "1", AdversaryBudget{}).best_p_acc, 0.0, 1e-9);
}

TEST(best_classical_prover, matches_full_enumeration) {
    AdversaryBudget b;
    b.memory_states = 1;
    for (const auto &[name, len] : std::vector<std::pair<std::string, int>>{{"zero_public", 1}, {"odd", 2}}) {
        QipSystem s = builtin_system(name);
        for (const auto &x : all_inputs(s.verifier.input_alphabet, len)) {
            const int rounds = static_cast<int>(x.size()) + 1;
            b.steps = rounds;
            AdversaryReport rep = best_classical_prover(s, x, b);
            EXPECT_TRUE(rep.is_exhaustive);
            EXPECT_NEAR(rep.best_p_acc, brute_force_memoryless(s, x, rounds), 1e-9) << name << " " << x;
        }
    }
}

TEST(best_classical_prover, report_reruns) {
    AdversaryBudget b;
    for (const auto &[name, x] : std::vector<std::pair<std::string, std::string>>{
             {"pal_sharp:d=2", "01#11"}, {"center:N=2", "001"}, {"pal_sharp:d=1", "1#1"}}) {
        QipSystem s = builtin_system(name);
        AdversaryReport rep = best_classical_prover(s, x, b);
        ASSERT_TRUE(rep.strategy);
        EXPECT_NEAR(run(s, *rep.strategy, x).p_acc, rep.best_p_acc, 1e-9);
        // The text form reloads to the same strategy.
        ProverPtr again = parse_prover(rep.best_strategy, s.verifier);
        EXPECT_NEAR(run(s, *again, x).p_acc, rep.best_p_acc, 1e-9) << name;
    }
}

TEST(best_classical_prover, node_cap_marks_partial) {
    AdversaryBudget b;
    b.node_cap = 5;
    AdversaryReport rep = best_classical_prover(pal_sharp_protocol(2), "01#11", b);
    EXPECT_FALSE(rep.is_exhaustive);
    EXPECT_GE(rep.best_p_acc, 0.0);
}

TEST(search_quantum_prover, zero_iterations_is_identity) {
    AdversaryBudget b;
    b.iterations = 0;
    b.restarts = 1;
    for (const auto &[name, x] : std::vector<std::pair<std::string, std::string>>{
             {"pal_sharp:d=1", "0#1"}, {"zero_public", "10"}, {"center:N=2", "011"}}) {
        QipSystem s = builtin_system(name);
        AdversaryReport rep = search_quantum_prover(s, x, 1, b);
        EXPECT_NEAR(rep.best_p_acc, run(s, IdentityProver(), x).p_acc, 1e-9) << name;
        EXPECT_FALSE(rep.is_exhaustive);
    }
}

TEST(search_quantum_prover, bounded_by_soundness_and_seeded_by_classical) {
    AdversaryBudget b;
    b.restarts = 10;
    b.iterations = 150;
    QipSystem pal = pal_sharp_protocol(1);
    AdversaryReport cl = best_classical_prover(pal, "0#1", b);
    AdversaryReport q = search_quantum_prover(pal, "0#1", 1, b, &cl);
    EXPECT_GE(q.best_p_acc, cl.best_p_acc - 1e-12);
    EXPECT_LE(q.best_p_acc, 0.5 + 1e-3);

    QipSystem center = center_protocol(2);
    AdversaryReport cc = best_classical_prover(center, "001", b);
    AdversaryReport qc = search_quantum_prover(center, "001", 1, b, &cc);
    EXPECT_GE(qc.best_p_acc, cc.best_p_acc - 1e-12);
    EXPECT_LE(qc.best_p_acc, 0.5 + 1e-3);
}

TEST(search_quantum_prover, reproducible) {
    AdversaryBudget b;
    b.restarts = 4;
    b.iterations = 60;
    b.seed = 42;
    QipSystem s = pal_sharp_protocol(1);
    AdversaryReport a = search_quantum_prover(s, "1#0", 1, b);
    AdversaryReport again = search_quantum_prover(s, "1#0", 1, b);
    EXPECT_EQ(a.best_p_acc, again.best_p_acc);
    EXPECT_EQ(a.best_restart, again.best_restart);
    ASSERT_TRUE(a.quantum);
    EXPECT_NEAR(evaluate_quantum(s, "1#0", *a.quantum), a.best_p_acc, 1e-9);
    EXPECT_NEAR(run(s, *a.strategy, "1#0").p_acc, a.best_p_acc, 1e-9);
    for (int r = 0; r < static_cast<int>(a.quantum->params.size()); ++r) {
        EXPECT_LE(unitarity_defect(a.quantum->round_unitary(r)), 1e-9);
    }
}

TEST(search_quantum_prover, dimension_cap) {
    AdversaryBudget b;
    b.max_dim = 8;
    EXPECT_THROW(search_quantum_prover(upal_protocol(4), "01", 1, b), CapacityError);
}

TEST(quantum_strategy, random_parameters_match_generic_run) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 2 * M_PI);
    for (const auto &[name, x] : std::vector<std::pair<std::string, std::string>>{
             {"pal_sharp:d=1", "0#0"}, {"center:N=2", "010"}, {"zero_public", "10"}, {"la_mo", "aa"}}) {
        QipSystem s = builtin_system(name);
        QuantumStrategy q;
        q.num_cells = s.verifier.num_cells();
        q.tape_alphabet = 2;
        q.c = 1;
        const int d = q.dimension();
        std::vector<int> ident(d);
        std::iota(ident.begin(), ident.end(), 0);
        for (int r = 0; r < 10; ++r) {
            std::vector<int> perm = ident;
            std::shuffle(perm.begin(), perm.end(), rng);
            q.base.push_back(perm);
            std::vector<double> p(d * d);
            for (auto &v : p) {
                v = u(rng);
            }
            q.params.push_back(p);
        }
        EXPECT_NEAR(evaluate_quantum(s, x, q), run(s, *q.prover(), x).p_acc, 1e-9) << name;
    }
}

TEST(tampering_suite, shifts_every_round_and_single_rounds) {
    QipSystem s = upal_protocol(4);
    auto suite = tampering_suite(s, "001");
    EXPECT_GT(suite.size(), 3u);
    for (const auto &p : suite) {
        EXPECT_GE(run(s, *p, "001").p_rej, 0.75 - 1e-6) << p->describe();
    }
}

TEST(adversary_suite, suite_relative_soundness) {
    AdversaryBudget b;
    b.node_cap = 300000;
    for (const auto &name : builtin_system_names()) {
        QipSystem s = builtin_system(name);
        const int len = name.rfind("upal", 0) == 0 ? 3 : 4;
        for (const auto &x : all_inputs(s.verifier.input_alphabet, len)) {
            if (s.member(x)) {
                continue;
            }
            SuiteResult r = adversary_suite(s, x, b, false);
            EXPECT_LE(r.max_p_acc, 1 - s.soundness + 1e-3) << name << " " << x << " " << r.best;
        }
    }
}
