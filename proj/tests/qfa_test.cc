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

#include "qip/qfa.h"

#include <gtest/gtest.h>

#include "qip/errors.h"
#include "qip/protocols.h"

using namespace qip;

namespace {

int64_t basis(const QfaSpec &s, const std::string &x, int q, int k, int cell) {
    return ((static_cast<int64_t>(q) * (static_cast<int64_t>(x.size()) + 2)) + k) * s.num_cells() + cell;
}

/// A few inputs of each length: all of them when there are at most 16, else an even spread.
std::vector<std::string> sample_inputs(const std::string &alpha, int len) {
    std::vector<std::string> out;
    int64_t total = 1;
    for (int i = 0; i < len; ++i) {
        total *= static_cast<int64_t>(alpha.size());
    }
    int64_t stride = std::max<int64_t>(1, total / 16);
    for (int64_t idx = 0; idx < total; idx += stride) {
        std::string x;
        int64_t v = idx;
        for (int i = 0; i < len; ++i) {
            x += alpha[v % alpha.size()];
            v /= alpha.size();
        }
        out.push_back(x);
    }
    return out;
}

}  // namespace

TEST(parse_amplitude, literal_forms) {
    EXPECT_NEAR(std::abs(parse_amplitude("1/sqrt(2)") - cd(1 / std::sqrt(2.0), 0)), 0, 1e-15);
    EXPECT_NEAR(std::abs(parse_amplitude("exp(2*pi*i*1/4)") - cd(0, 1)), 0, 1e-15);
    EXPECT_NEAR(std::abs(parse_amplitude("-i") - cd(0, -1)), 0, 1e-15);
    EXPECT_NEAR(std::abs(parse_amplitude("3/4") - cd(0.75, 0)), 0, 1e-15);
    EXPECT_NEAR(std::abs(parse_amplitude("-1/sqrt(2)*exp(2*pi*i*1/2)") - cd(1 / std::sqrt(2.0), 0)), 0, 1e-15);
    EXPECT_EQ(parse_amplitude("0.1"), cd(0.1, 0));
    EXPECT_THROW(parse_amplitude("banana"), ParseError);
}

TEST(spec_text, round_trip_builtins) {
    for (const auto &name : builtin_system_names()) {
        QipSystem s = builtin_system(name);
        EXPECT_EQ(parse_spec(serialize_spec(s.source)), s.source) << name;
        EXPECT_EQ(parse_spec(serialize_spec(s.verifier)), s.verifier) << name;
        EXPECT_EQ(serialize_spec(parse_spec(serialize_spec(s.verifier))), serialize_spec(s.verifier)) << name;
    }
}

TEST(spec_text, decimal_literals_bit_exact) {
    const std::string text =
        "qfa\nhead one_way\nsigma 0\ncells #\ntape #\n"
        "state p non init\nstate a acc\nstate r rej\n"
        "move p ^ # -> p # +1 1\n"
        "move p 0 # -> a # +1 0.6\nmove p 0 # -> r # +1 0.8\n"
        "move p $ # -> a # +1 0.1 0.3\n";
    QfaSpec s = parse_spec(text);
    const auto &moves = s.delta.at({s.state_index("p"), s.symbol_index('0'), 0});
    ASSERT_EQ(moves.size(), 2u);
    EXPECT_EQ(moves[0].amp, cd(0.6, 0));
    EXPECT_EQ(moves[1].amp, cd(0.8, 0));
    EXPECT_EQ(s.delta.at({s.state_index("p"), s.symbol_index('$'), 0})[0].amp, cd(0.1, 0.3));
    EXPECT_EQ(parse_spec(serialize_spec(s)), s);
}

TEST(spec_text, parse_errors) {
    EXPECT_THROW(parse_spec("qfa\nhead sideways\n"), ParseError);
    EXPECT_THROW(parse_spec("qfa\nhead one_way\nsigma 0\nstate p non init\nmove p 0 # -> q # +1 1\n"), ParseError);
    EXPECT_THROW(parse_spec("qfa\nhead one_way\nsigma 0^\nstate p non init\n"), Error);
}

TEST(step_operator, zero_public_first_move) {
    QipSystem s = zero_public_protocol();
    const QfaSpec &v = s.verifier;
    const std::string x = "0";
    DenseOperator u = build_step_operator(v, x);
    int q0 = v.state_index("q0");
    int64_t from = basis(v, x, q0, 0, v.cell_index("#"));
    int64_t to = basis(v, x, q0, 1, v.cell_index("q0"));
    EXPECT_NEAR(std::abs(u(to, from) - cd(1, 0)), 0, 1e-15);
    EXPECT_NEAR(u.col(from).squaredNorm(), 1.0, 1e-15);
}

TEST(step_operator, pal_sharp_unitary) {
    QipSystem s = pal_sharp_protocol(1);
    EXPECT_TRUE(check_unitary(build_step_operator(s.verifier, "0#0")));
    EXPECT_THROW(build_step_operator(s.verifier, "0#2"), AlphabetError);
}

TEST(step_operator, dense_matches_sparse) {
    QipSystem s = pal_sharp_protocol(2);
    DenseOperator d = build_step_operator(s.verifier, "01#1");
    DenseOperator from_sparse = DenseOperator(build_step_operator_sparse(s.verifier, "01#1"));
    EXPECT_LE((d - from_sparse).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(completion, empty_table_becomes_permutation) {
    SpecBuilder b(HeadModel::OneWay, "01");
    b.state("p");
    b.set_initial("p");
    auto [spec, rep] = validate_and_complete(b.build(), {0, 1, 2, 3});
    EXPECT_TRUE(rep.ok());
    EXPECT_GE(rep.fresh_states, 1);
    for (const auto &x : {"", "0", "01", "110"}) {
        DenseOperator u = build_step_operator(spec, x);
        EXPECT_TRUE(check_unitary(u));
        for (int64_t j = 0; j < u.cols(); ++j) {
            int nonzero = 0;
            for (int64_t i = 0; i < u.rows(); ++i) {
                if (std::abs(u(i, j)) > 1e-12) {
                    ++nonzero;
                    EXPECT_NEAR(std::abs(u(i, j)), 1.0, 1e-12);
                }
            }
            EXPECT_EQ(nonzero, 1);
        }
    }
    // Every live column lands in a fresh rejecting state.
    int p = spec.state_index("p");
    for (int sym = 0; sym < spec.num_symbols(); ++sym) {
        const auto &moves = spec.delta.at({p, sym, 0});
        ASSERT_EQ(moves.size(), 1u);
        EXPECT_EQ(spec.kinds[moves[0].to], StateKind::Rejecting);
        EXPECT_TRUE(moves[0].completed);
    }
}

TEST(completion, duplicated_column_names_both) {
    SpecBuilder b(HeadModel::OneWay, "0");
    b.state("p");
    b.state("r");
    b.set_initial("p");
    b.on_dir("p", '0', "#", "r", "#", 1);
    b.on_dir("r", '0', "#", "r", "#", 1);
    try {
        validate_and_complete(b.build(), {1});
        FAIL() << "expected an orthonormality error";
    } catch (const OrthonormalityError &e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("(p,0,#)"), std::string::npos) << msg;
        EXPECT_NE(msg.find("(r,0,#)"), std::string::npos) << msg;
    }
}

TEST(completion, idempotent_and_preserves_specified) {
    for (const auto &name : builtin_system_names()) {
        QipSystem s = builtin_system(name);
        auto [again, rep] = validate_and_complete(s.verifier, {});
        EXPECT_EQ(rep.completed_transitions, 0) << name;
        EXPECT_EQ(rep.fresh_states, 0) << name;
        EXPECT_EQ(again, s.verifier) << name;
        for (const auto &[key, moves] : s.source.delta) {
            EXPECT_EQ(s.verifier.delta.at(key), moves) << name;
        }
    }
}

TEST(completion, la_partial_table_lengths_0_to_6) {
    QipSystem s = la_mo_protocol();
    auto [spec, rep] = validate_and_complete(s.source, {0, 1, 2, 3, 4, 5, 6});
    EXPECT_TRUE(rep.ok());
    for (int n = 0; n <= 6; ++n) {
        EXPECT_TRUE(rep.well_formed.at(n)) << n;
    }
}

TEST(head, circular_left_move) {
    SpecBuilder b(HeadModel::TwoWay, "0");
    b.state("p");
    b.state("back");
    b.set_initial("p");
    b.on_dir("p", '^', "#", "back", "#", -1);
    QfaSpec spec = validate_and_complete(b.build(), {}).first;
    const std::string x = "00";
    DenseOperator u = build_step_operator(spec, x);
    int64_t from = basis(spec, x, spec.state_index("p"), 0, 0);
    int64_t to = basis(spec, x, spec.state_index("back"), static_cast<int>(x.size()) + 1, 0);
    EXPECT_NEAR(std::abs(u(to, from)), 1.0, 1e-15);
}

TEST(head, d_form_direction_from_target) {
    SpecBuilder b(HeadModel::TwoWay, "0");
    b.state("p", StateKind::NonHalting, 1);
    b.state("left", StateKind::NonHalting, -1);
    b.set_initial("p");
    b.on("p", '^', "#", "left", "#");
    EXPECT_EQ(b.spec().delta.at({0, 0, 0})[0].dir, -1);
    QfaSpec parsed = parse_spec(
        "qfa\nhead two_way\nsigma 0\ncells #\ntape #\nstate p non init +1\nstate l non -1\n"
        "move p ^ # -> l # D 1\n");
    EXPECT_EQ(parsed.delta.at({0, 0, 0})[0].dir, -1);
}

TEST(unitarity, builtins_lengths_0_to_8) {
    for (const auto &name : builtin_system_names()) {
        QipSystem s = builtin_system(name);
        for (int len = 0; len <= 8; ++len) {
            for (const auto &x : sample_inputs(s.verifier.input_alphabet, len)) {
                EXPECT_LE(unitarity_defect(build_step_operator_sparse(s.verifier, x)), 1e-9) << name << " " << x;
            }
        }
    }
}

TEST(structure, public_and_measure_once_examples) {
    EXPECT_TRUE(check_structure(zero_public_protocol().verifier, StructureMode::Public).ok());
    EXPECT_FALSE(check_structure(pal_sharp_protocol(2).verifier, StructureMode::Public).ok());
    EXPECT_TRUE(check_structure(la_mo_protocol().verifier, StructureMode::MeasureOnce).ok());
    EXPECT_FALSE(check_structure(zero_public_protocol().verifier, StructureMode::MeasureOnce).ok());
}

TEST(structure, declared_modes_hold_for_builtins) {
    for (const auto &name : builtin_system_names()) {
        QipSystem s = builtin_system(name);
        for (StructureMode m : s.structure_modes) {
            EXPECT_TRUE(check_structure(s.verifier, m, {0, 1, 2, 3, 4, 5, 6, 7, 8}).ok()) << name;
        }
    }
}

TEST(structure, one_way_halting_detects_leftover) {
    SpecBuilder b(HeadModel::OneWay, "0");
    b.state("p");
    b.state("acc", StateKind::Accepting);
    b.set_initial("p");
    b.on_dir("p", '^', "#", "p", "#", 1);
    b.on_dir("p", '0', "#", "p", "#", 1);
    QfaSpec spec = validate_and_complete(b.build(), {}).first;
    // On '$' the completion routes to a fresh rejecting state, so the run halts.
    EXPECT_TRUE(check_structure(spec, StructureMode::OneWayHalting, {0, 1, 2}).ok());
}

TEST(structure, one_way_halting_flags_live_mass) {
    SpecBuilder b(HeadModel::OneWay, "0");
    b.state("p");
    b.state("late");
    b.set_initial("p");
    b.on_dir("p", '^', "#", "p", "#", 1);
    b.on_dir("p", '0', "#", "p", "#", 1);
    b.on_dir("p", '$', "#", "late", "#", 1);
    QfaSpec spec = validate_and_complete(b.build(), {}).first;
    ValidationReport rep = check_structure(spec, StructureMode::OneWayHalting, {0, 1, 2});
    EXPECT_FALSE(rep.ok());
    EXPECT_FALSE(rep.violations.empty());
}
