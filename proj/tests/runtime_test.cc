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

#include "qip/runtime.h"

#include <gtest/gtest.h>

#include <random>

#include "qip/errors.h"
#include "qip/protocols.h"
#include "oracles.h"

using namespace qip;
using oracle::all_inputs;
using oracle::dense_oracle;
using oracle::DenseOracle;
using oracle::random_unitary;

TEST(run, headline_examples) {
    QipSystem zero = zero_public_protocol();
    EXPECT_NEAR(run(zero, *zero.honest_prover("0"), "0", 16).p_acc, 1.0, 1e-9);

    QipSystem pal = pal_sharp_protocol(2);
    EXPECT_NEAR(run(pal, *pal.honest_prover("01#10"), "01#10", 64).p_acc, 1.0, 1e-9);
    RunResult id = run(pal, IdentityProver(), "01#10", 64);
    EXPECT_GE(id.p_rej, 0.75);
}

TEST(run, identity_matches_dense_oracle) {
    for (const auto &name : {"zero_public", "la_mo", "odd", "pal_sharp:d=1", "pal_sharp:d=2", "center:N=2",
                             "eraser:dfa=zero", "rfa:even", "npfa:coin", "union:a=zero,b=ends1"}) {
        QipSystem s = builtin_system(name);
        const int nc = s.verifier.num_cells();
        DenseProver ident(nc, 1, 1, {});
        for (const auto &x : all_inputs(s.verifier.input_alphabet, 3)) {
            RunResult r = run(s, IdentityProver(), x, 64);
            DenseOracle o = dense_oracle(s.verifier, ident, x, 64);
            EXPECT_NEAR(r.p_acc, o.p_acc, 1e-9) << name << " " << x;
            EXPECT_NEAR(r.p_rej, o.p_rej, 1e-9) << name << " " << x;
            EXPECT_NEAR(r.p_cont, o.p_cont, 1e-9) << name << " " << x;
        }
    }
}

TEST(run, dense_and_sparse_agree_on_honest_provers) {
    for (const auto &name : {"zero_public", "pal_sharp:d=1", "pal_sharp:d=2", "center:N=2"}) {
        QipSystem s = builtin_system(name);
        for (const auto &x : all_inputs(s.verifier.input_alphabet, 4)) {
            if (x.size() > 4) {
                continue;
            }
            auto cp = std::dynamic_pointer_cast<const ClassicalProver>(s.honest_prover(x));
            ASSERT_NE(cp, nullptr) << name;
            auto dense = densify(*cp);
            RunResult sparse_run = run(s, *cp, x, 200);
            RunResult dense_run = run(s, *dense, x, 200);
            DenseOracle o = dense_oracle(s.verifier, *dense, x, 200);
            EXPECT_NEAR(sparse_run.p_acc, dense_run.p_acc, 1e-9) << name << " " << x;
            EXPECT_NEAR(sparse_run.p_acc, o.p_acc, 1e-9) << name << " " << x;
            EXPECT_NEAR(sparse_run.p_rej, o.p_rej, 1e-9) << name << " " << x;
        }
    }
}

TEST(run, random_dense_provers_match_oracle) {
    std::mt19937_64 rng(3);
    QipSystem s = pal_sharp_protocol(1);
    const int nc = s.verifier.num_cells();
    for (const auto &x : {"0#0", "1#0", "#", "01"}) {
        for (int c = 1; c <= 2; ++c) {
            const int dim = nc * (c == 1 ? 2 : 4);
            std::vector<DenseOperator> rounds;
            for (int r = 0; r < 12; ++r) {
                rounds.push_back(random_unitary(dim, rng));
            }
            DenseProver p(nc, 2, c, rounds);
            RunResult r = run(s, p, x, 40);
            DenseOracle o = dense_oracle(s.verifier, p, x, 40);
            EXPECT_NEAR(r.p_acc, o.p_acc, 1e-9) << x;
            EXPECT_NEAR(r.p_rej, o.p_rej, 1e-9) << x;
            EXPECT_NEAR(r.p_cont, o.p_cont, 1e-9) << x;
            EXPECT_LE(r.max_conservation_error, 1e-9);
        }
    }
}

TEST(run, conservation_every_round) {
    for (const auto &name : builtin_system_names()) {
        QipSystem s = builtin_system(name);
        for (const auto &x : all_inputs(s.verifier.input_alphabet, 4)) {
            if (x.size() > 4) {
                continue;
            }
            for (const ProverPtr &p : {s.honest_prover(x), ProverPtr(std::make_shared<IdentityProver>())}) {
                RunResult r = run(s, *p, x);
                EXPECT_LE(r.max_conservation_error, 1e-9) << name << " " << x;
                EXPECT_NEAR(r.p_acc + r.p_rej + r.p_cont, 1.0, 1e-9) << name << " " << x;
            }
        }
    }
}

TEST(run, measure_once_equals_measuring_every_step) {
    QipSystem s = la_mo_protocol();
    QfaSpec every = s.verifier;
    every.head = HeadModel::OneWay;
    for (const auto &x : all_inputs("a", 6)) {
        for (const ProverPtr &p : {s.honest_prover(x), ProverPtr(std::make_shared<IdentityProver>())}) {
            RunResult once = run(s, *p, x);
            RunResult each = run_spec(every, *p, x);
            bool only_final = true;
            for (const auto &h : each.halting_profile) {
                if (h.round < static_cast<int>(x.size()) + 2 && h.acc + h.rej > 1e-12) {
                    only_final = false;
                }
            }
            // Honest runs never halt early. When another prover makes mass halt mid-run, a measure-once run keeps
            // evolving it, so the two runs are not comparable.
            if (dynamic_cast<const IdentityProver *>(p.get()) == nullptr) {
                EXPECT_TRUE(only_final) << x;
            }
            if (!only_final) {
                continue;
            }
            EXPECT_NEAR(once.p_acc, each.p_acc, 1e-9) << x;
            EXPECT_NEAR(once.p_rej, each.p_rej, 1e-9) << x;
        }
    }
}

TEST(run, eraser_matches_dfa) {
    for (const auto &dfa_name : {"zero", "ends1", "even_ones"}) {
        Dfa dfa = builtin_dfa(dfa_name);
        QipSystem s = eraser_protocol(dfa);
        for (const auto &x : all_inputs(dfa.alphabet, 8)) {
            RunResult r = run(s, *s.honest_prover(x), x);
            EXPECT_NEAR(r.p_acc, dfa.accepts(x) ? 1.0 : 0.0, 1e-9) << dfa_name << " " << x;
        }
    }
}

TEST(run, truncation_reported) {
    QipSystem pal = pal_sharp_protocol(2);
    RunResult r = run(pal, *pal.honest_prover("01#10"), "01#10", 3);
    EXPECT_TRUE(r.truncated);
    EXPECT_GT(r.p_cont, 0.5);
    EXPECT_EQ(r.rounds_executed, 3);
    EXPECT_EQ(default_t_max("01#10"), 20 * 49);
}

TEST(run, errors) {
    QipSystem zero = zero_public_protocol();
    EXPECT_THROW(run(zero, IdentityProver(), "012"), AlphabetError);

    SpecBuilder b(HeadModel::OneWay, "0");
    b.state("p");
    b.state("late");
    b.set_initial("p");
    b.on_dir("p", '^', "#", "p", "#", 1);
    b.on_dir("p", '0', "#", "p", "#", 1);
    b.on_dir("p", '$', "#", "late", "#", 1);
    QfaSpec spec = validate_and_complete(b.build(), {}).first;
    EXPECT_THROW(run_spec(spec, IdentityProver(), "0"), StructureError);
}

TEST(halting_time, examples) {
    QipSystem zero = zero_public_protocol();
    HaltingTime h = expected_halting_time(zero, *zero.honest_prover("0"), "0");
    EXPECT_NEAR(h.value, 3.0, 1e-9);
    EXPECT_TRUE(h.upper_bound_known);

    QipSystem la = la_mo_protocol();
    EXPECT_NEAR(expected_halting_time(la, *la.honest_prover(""), "").value, 2.0, 1e-9);

    QipSystem pal = pal_sharp_protocol(1);
    HaltingTime p = expected_halting_time(pal, *pal.honest_prover("0#0"), "0#0", 200);
    EXPECT_TRUE(p.upper_bound_known);
    EXPECT_GT(p.value, 0);
    EXPECT_LE(p.value, 200);

    HaltingTime cut = expected_halting_time(pal, *pal.honest_prover("0#0"), "0#0", 3);
    EXPECT_FALSE(cut.upper_bound_known);
}

TEST(interactions, odd_examples) {
    QipSystem odd = odd_protocol();
    EXPECT_EQ(count_interactions(odd, *odd.honest_prover("10"), "10"), 1);
    EXPECT_EQ(count_interactions(odd, *odd.honest_prover("0"), "0"), 0);
    EXPECT_EQ(count_interactions(odd, IdentityProver(), "11"), 1);

    ClassicalTable t;
    t.num_cells = odd.verifier.num_cells();
    t.memory_states = 1;
    t.set(1, 0, 0, 1, 0);
    EXPECT_THROW(count_interactions(odd, ClassicalProver(t), "10"), ContractError);
}

TEST(interactions, odd_committed_at_most_one) {
    QipSystem odd = odd_protocol();
    for (const auto &x : all_inputs("01", 6)) {
        EXPECT_LE(count_interactions(odd, *odd.honest_prover(x), x), 1) << x;
        EXPECT_LE(count_interactions(odd, IdentityProver(), x), 1) << x;
    }
}

TEST(query_weight, examples) {
    QfaSpec odd = odd_protocol().verifier;
    EXPECT_NEAR(query_weight(odd, "", "01"), 1.0, 1e-12);
    EXPECT_NEAR(query_weight(odd, "", "00"), 0.0, 1e-12);
    EXPECT_NEAR(query_weight(odd, "1", ""), 0.0, 1e-12);
    EXPECT_THROW(query_weight(pal_sharp_protocol(1).verifier, "", "0"), Error);
}

TEST(query_weight, additive_over_splits) {
    for (const auto &name : {"odd", "zero_public", "eraser:dfa=even_ones"}) {
        QfaSpec v = builtin_system(name).verifier;
        for (const auto &w : all_inputs(v.input_alphabet, 6)) {
            for (size_t cut = 0; cut <= w.size(); ++cut) {
                std::string x = w.substr(0, cut);
                std::string y = w.substr(cut);
                EXPECT_NEAR(query_weight(v, "", x) + query_weight(v, x, y), query_weight(v, "", w), 1e-9)
                    << name << " " << x << "|" << y;
            }
        }
    }
}
