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

#include "qip/linalg.h"

#include <gtest/gtest.h>

#include <random>

#include "qip/errors.h"

using namespace qip;

namespace {

DenseOperator random_unitary(int n, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    DenseOperator m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = cd(g(rng), g(rng));
        }
    }
    Eigen::HouseholderQR<DenseOperator> qr(m);
    return qr.householderQ();
}

}  // namespace

TEST(check_unitary, identity_and_shear) {
    EXPECT_TRUE(check_unitary(DenseOperator::Identity(4, 4)));
    DenseOperator shear(2, 2);
    shear << 1, 1, 0, 1;
    EXPECT_FALSE(check_unitary(shear));
    EXPECT_THROW(check_unitary(DenseOperator::Zero(2, 3)), DimensionError);
}

TEST(check_unitary, defect_value) {
    DenseOperator m = DenseOperator::Identity(2, 2);
    m(0, 0) = 2;
    EXPECT_NEAR(unitarity_defect(m), 3.0, 1e-15);
    SparseOperator s = m.sparseView();
    EXPECT_NEAR(unitarity_defect(s), 3.0, 1e-15);
}

TEST(qft_matrix, small_cases) {
    DenseOperator one = qft_matrix(1);
    ASSERT_EQ(one.rows(), 1);
    EXPECT_NEAR(std::abs(one(0, 0) - cd(1, 0)), 0, 1e-15);

    DenseOperator two = qft_matrix(2);
    const double h = 1 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(two(0, 0) - h), 0, 1e-15);
    EXPECT_NEAR(std::abs(two(0, 1) - h), 0, 1e-15);
    EXPECT_NEAR(std::abs(two(1, 0) - h), 0, 1e-15);
    EXPECT_NEAR(std::abs(two(1, 1) + h), 0, 1e-15);
    EXPECT_THROW(qft_matrix(0), DomainError);
}

TEST(qft_matrix, unitary_and_order_four) {
    for (int n = 1; n <= 16; ++n) {
        DenseOperator f = qft_matrix(n);
        EXPECT_LE(unitarity_defect(f), 1e-9) << n;
        // The Fourier transform has order four.
        DenseOperator f4 = f * f * f * f;
        EXPECT_LE((f4 - DenseOperator::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-9) << n;
        // Symmetric with row sums of the first row equal to sqrt(n).
        EXPECT_LE((f - f.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(std::abs(f.row(0).sum()), std::sqrt(static_cast<double>(n)), 1e-9);
    }
}

TEST(near_identity_power, examples) {
    DenseVector x(2);
    x << 0.6, 0.8;
    EXPECT_EQ(near_identity_power(DenseOperator::Identity(2, 2), x, 0.1, 10), 1);

    DenseOperator u = DenseOperator::Identity(2, 2);
    u(1, 1) = std::polar(1.0, 2 * M_PI / 3);
    DenseVector y(2);
    y << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    EXPECT_EQ(near_identity_power(u, y, 1e-12, 100), 3);

    DenseOperator w = DenseOperator::Identity(2, 2);
    w(1, 1) = std::polar(1.0, 1.0);
    DenseVector e1(2);
    e1 << 0, 1;
    auto n = near_identity_power(w, e1, 0.01, 1000000);
    ASSERT_TRUE(n.has_value());
    // Independent recomputation of the residual.
    DenseVector v = e1;
    for (int64_t i = 0; i < *n; ++i) {
        v = w * v;
    }
    EXPECT_LT((e1 - v).squaredNorm(), 0.01);
}

TEST(near_identity_power, budget_and_errors) {
    DenseOperator w = DenseOperator::Identity(2, 2);
    w(1, 1) = std::polar(1.0, 1.0);
    DenseVector e1(2);
    e1 << 0, 1;
    EXPECT_FALSE(near_identity_power(w, e1, 1e-6, 3).has_value());
    DenseOperator bad = DenseOperator::Identity(2, 2) * 2.0;
    EXPECT_THROW(near_identity_power(bad, e1, 0.1, 10), ContractError);
}

TEST(unitary, norm_preserved_over_powers) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        DenseOperator u = random_unitary(5, rng);
        DenseVector v = DenseVector::Random(5);
        v.normalize();
        for (int i = 0; i < 1000; ++i) {
            v = u * v;
            ASSERT_NEAR(v.norm(), 1.0, 1e-9);
        }
    }
}

TEST(sparse_vector, add_prune_norm_order) {
    SparseVector<std::pair<int, int>> v;
    v.add({2, 0}, cd(0.6, 0));
    v.add({1, 5}, cd(0, 0.8));
    v.add({2, 0}, cd(1e-14, 0));
    v.add({3, 3}, cd(1e-13, 0));
    v.prune();
    EXPECT_EQ(v.size(), 2u);
    EXPECT_NEAR(v.norm2(), 1.0, 1e-12);
    EXPECT_EQ(v.begin()->first, std::make_pair(1, 5));
    EXPECT_EQ(v.get({9, 9}), cd(0, 0));
}

TEST(tolerances, parse_and_defaults) {
    Tolerances t = Tolerances::parse("probability=1e-4");
    EXPECT_DOUBLE_EQ(t.probability, 1e-4);
    EXPECT_DOUBLE_EQ(t.unitary, kUnitaryTol);
    EXPECT_DOUBLE_EQ(t.prune, kPruneTol);
    EXPECT_THROW(Tolerances::parse("unitary=-1"), DomainError);
    EXPECT_THROW(Tolerances::parse("speed=3"), DomainError);
}
