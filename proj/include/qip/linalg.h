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

#ifndef QIP_LINALG_H
#define QIP_LINALG_H

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace qip {

using cd = std::complex<double>;
using DenseOperator = Eigen::MatrixXcd;
using SparseOperator = Eigen::SparseMatrix<cd, Eigen::ColMajor, int64_t>;
using DenseVector = Eigen::VectorXcd;

/// Numeric thresholds shared by every module.
struct Tolerances {
    double unitary = 1e-9;
    double probability = 1e-6;
    double prune = 1e-12;

    /// Reads QIPSIM_TOLERANCES ("unitary=1e-9,probability=1e-6,prune=1e-12"); missing keys keep defaults.
    static Tolerances from_env();
    static Tolerances parse(const std::string &text);
};

constexpr double kUnitaryTol = 1e-9;
constexpr double kProbabilityTol = 1e-6;
constexpr double kPruneTol = 1e-12;

/// Largest entry magnitude of U^dagger U - I.
double unitarity_defect(const DenseOperator &m);
double unitarity_defect(const SparseOperator &m);

bool check_unitary(const DenseOperator &m, double tol = kUnitaryTol);
bool check_unitary(const SparseOperator &m, double tol = kUnitaryTol);

/// N-point Fourier matrix, entry (l, j) = exp(2 pi i j l / N) / sqrt(N).
DenseOperator qft_matrix(int n);

/// Smallest n in [1, n_max] with ||(I - U^n) x||^2 < eps, or nullopt when the budget runs out.
std::optional<int64_t> near_identity_power(const DenseOperator &u, const DenseVector &x, double eps, int64_t n_max);

/// Amplitude map over ordered labels. Iteration order is the label order, so output built from it is reproducible.
template <typename Label>
class SparseVector {
   public:
    using Map = std::map<Label, cd>;

    void add(const Label &label, cd amp) {
        auto [it, fresh] = entries_.try_emplace(label, amp);
        if (!fresh) {
            it->second += amp;
        }
    }

    cd get(const Label &label) const {
        auto it = entries_.find(label);
        return it == entries_.end() ? cd{0, 0} : it->second;
    }

    /// Drops entries whose magnitude is below thr.
    void prune(double thr = kPruneTol) {
        for (auto it = entries_.begin(); it != entries_.end();) {
            if (std::abs(it->second) < thr) {
                it = entries_.erase(it);
            } else {
                ++it;
            }
        }
    }

    double norm2() const {
        double s = 0;
        for (const auto &[k, v] : entries_) {
            s += std::norm(v);
        }
        return s;
    }

    bool empty() const {
        return entries_.empty();
    }
    size_t size() const {
        return entries_.size();
    }
    void clear() {
        entries_.clear();
    }
    auto begin() const {
        return entries_.begin();
    }
    auto end() const {
        return entries_.end();
    }
    const Map &entries() const {
        return entries_;
    }
    Map &entries() {
        return entries_;
    }

   private:
    Map entries_;
};

}  // namespace qip

#endif
