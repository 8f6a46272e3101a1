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

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "qip/errors.h"

namespace qip {

Tolerances Tolerances::parse(const std::string &text) {
    Tolerances t;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        std::string key = item.substr(0, eq);
        double val = std::strtod(item.c_str() + eq + 1, nullptr);
        if (!(val > 0)) {
            throw DomainError("tolerance must be positive: " + item);
        }
        if (key == "unitary") {
            t.unitary = val;
        } else if (key == "probability") {
            t.probability = val;
        } else if (key == "prune") {
            t.prune = val;
        } else {
            throw DomainError("unknown tolerance key: " + key);
        }
    }
    return t;
}

Tolerances Tolerances::from_env() {
    const char *env = std::getenv("QIPSIM_TOLERANCES");
    if (env == nullptr) {
        return {};
    }
    return parse(env);
}

double unitarity_defect(const DenseOperator &m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("operator is not square");
    }
    if (m.rows() == 0) {
        return 0;
    }
    DenseOperator g = m.adjoint() * m;
    g -= DenseOperator::Identity(m.rows(), m.cols());
    return g.cwiseAbs().maxCoeff();
}

double unitarity_defect(const SparseOperator &m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("operator is not square");
    }
    SparseOperator g = SparseOperator(m.adjoint()) * m;
    double worst = 0;
    std::vector<bool> diag_seen(m.cols(), false);
    for (int64_t c = 0; c < g.outerSize(); ++c) {
        for (SparseOperator::InnerIterator it(g, c); it; ++it) {
            cd v = it.value();
            if (it.row() == it.col()) {
                v -= 1.0;
                diag_seen[c] = true;
            }
            worst = std::max(worst, std::abs(v));
        }
    }
    for (bool seen : diag_seen) {
        if (!seen) {
            worst = std::max(worst, 1.0);
        }
    }
    return worst;
}

bool check_unitary(const DenseOperator &m, double tol) {
    if (!(tol > 0)) {
        throw DomainError("tolerance must be positive");
    }
    return unitarity_defect(m) <= tol;
}

bool check_unitary(const SparseOperator &m, double tol) {
    if (!(tol > 0)) {
        throw DomainError("tolerance must be positive");
    }
    return unitarity_defect(m) <= tol;
}

DenseOperator qft_matrix(int n) {
    if (n <= 0) {
        throw DomainError("Fourier dimension must be at least 1");
    }
    DenseOperator f(n, n);
    double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int l = 0; l < n; ++l) {
        for (int j = 0; j < n; ++j) {
            // Reduce jl mod n first so large products keep full phase accuracy.
            int64_t e = (static_cast<int64_t>(j) * l) % n;
            double ang = 2 * M_PI * static_cast<double>(e) / n;
            f(l, j) = std::polar(scale, ang);
        }
    }
    return f;
}

std::optional<int64_t> near_identity_power(const DenseOperator &u, const DenseVector &x, double eps, int64_t n_max) {
    if (u.rows() != u.cols() || u.rows() != x.size()) {
        throw DimensionError("operator and vector sizes disagree");
    }
    if (!(eps > 0) || n_max < 1) {
        throw DomainError("eps must be positive and n_max at least 1");
    }
    if (!check_unitary(u)) {
        throw ContractError("near_identity_power needs a unitary operator");
    }
    DenseVector v = x;
    for (int64_t n = 1; n <= n_max; ++n) {
        v = u * v;
        if ((x - v).squaredNorm() < eps) {
            return n;
        }
    }
    return std::nullopt;
}

}  // namespace qip
