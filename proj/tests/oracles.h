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

#ifndef QIP_TESTS_ORACLES_H
#define QIP_TESTS_ORACLES_H

// Reference computations shared by the unit tests and the acceptance binary. They avoid the library's own
// evolution and search code.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "qip/protocols.h"

namespace qip::oracle {

inline std::vector<std::string> all_inputs(const std::string &alpha, int max_len) {
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

/// Acceptance probability of the npfa under one fixed choice per (state, head position), solved as a linear system
/// over the configurations that can still reach acceptance.
inline double npfa_fixed_strategy_value(const Npfa &m, const std::string &x, const std::map<std::pair<int, int>, int> &pick) {
    const int ns = static_cast<int>(m.states.size());
    const int w = static_cast<int>(x.size()) + 2;
    const std::string tape = "^" + x + "$";
    auto id = [w](int p, int k) { return p * w + k; };
    const int n = ns * w;
    std::vector<std::vector<std::pair<int, double>>> succ(n);
    for (int p = 0; p < ns; ++p) {
        for (int k = 0; k < w; ++k) {
            if (m.kinds[p] == Npfa::Kind::Accept || m.kinds[p] == Npfa::Kind::Reject) {
                continue;
            }
            const auto &opts = m.options(p, tape[k]);
            if (opts.empty()) {
                continue;
            }
            if (m.kinds[p] == Npfa::Kind::Coin) {
                for (auto [q, d] : opts) {
                    succ[id(p, k)].push_back({id(q, ((k + d) % w + w) % w), 0.5});
                }
            } else {
                auto [q, d] = opts[pick.at({p, k})];
                succ[id(p, k)].push_back({id(q, ((k + d) % w + w) % w), 1.0});
            }
        }
    }
    std::vector<bool> good(n, false);
    for (int p = 0; p < ns; ++p) {
        for (int k = 0; k < w; ++k) {
            good[id(p, k)] = m.kinds[p] == Npfa::Kind::Accept;
        }
    }
    for (bool grew = true; grew;) {
        grew = false;
        for (int v = 0; v < n; ++v) {
            for (auto [u, pr] : succ[v]) {
                if (!good[v] && good[u]) {
                    good[v] = grew = true;
                }
            }
        }
    }
    std::vector<int> idx(n, -1);
    int live = 0;
    for (int v = 0; v < n; ++v) {
        if (good[v] && m.kinds[v / w] != Npfa::Kind::Accept) {
            idx[v] = live++;
        }
    }
    if (!good[id(m.start, 0)]) {
        return 0;
    }
    if (idx[id(m.start, 0)] < 0) {
        return 1;
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(live, live);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(live);
    for (int v = 0; v < n; ++v) {
        if (idx[v] < 0) {
            continue;
        }
        for (auto [u, pr] : succ[v]) {
            if (m.kinds[u / w] == Npfa::Kind::Accept) {
                b[idx[v]] += pr;
            } else if (idx[u] >= 0) {
                a(idx[v], idx[u]) -= pr;
            }
        }
    }
    Eigen::VectorXd sol = a.fullPivLu().solve(b);
    return sol[idx[id(m.start, 0)]];
}

inline double npfa_brute_force(const Npfa &m, const std::string &x) {
    const int w = static_cast<int>(x.size()) + 2;
    const std::string tape = "^" + x + "$";
    std::vector<std::pair<int, int>> slots;
    std::vector<int> sizes;
    for (int p = 0; p < static_cast<int>(m.states.size()); ++p) {
        if (m.kinds[p] != Npfa::Kind::Choice) {
            continue;
        }
        for (int k = 0; k < w; ++k) {
            size_t sz = m.options(p, tape[k]).size();
            if (sz > 0) {
                slots.push_back({p, k});
                sizes.push_back(static_cast<int>(sz));
            }
        }
    }
    std::vector<int> digit(slots.size(), 0);
    double best = 0;
    while (true) {
        std::map<std::pair<int, int>, int> pick;
        for (size_t i = 0; i < slots.size(); ++i) {
            pick[slots[i]] = digit[i];
        }
        best = std::max(best, npfa_fixed_strategy_value(m, x, pick));
        size_t i = 0;
        for (; i < slots.size(); ++i) {
            if (++digit[i] < sizes[i]) {
                break;
            }
            digit[i] = 0;
        }
        if (i == slots.size()) {
            break;
        }
    }
    return best;
}

/// Reference evolution built from full matrices: verifier step (x) identity on the prover space, then the prover's
/// round unitary on (cell, tape) for every verifier (state, head) pair.
struct DenseOracle {
    double p_acc = 0;
    double p_rej = 0;
    double p_cont = 0;
};

inline DenseOracle dense_oracle(const QfaSpec &spec, const DenseProver &p, const std::string &x, int64_t t_max) {
    const DenseOperator u = build_step_operator(spec, x, 1 << 14);
    const int nc = spec.num_cells();
    const int64_t vdim = u.rows();
    const int64_t tdim = p.dimension() / nc;
    const int64_t dim = vdim * tdim;
    const int width = static_cast<int>(x.size()) + 2;
    DenseVector psi = DenseVector::Zero(dim);
    psi[(static_cast<int64_t>(spec.initial) * width * nc) * tdim] = 1;
    auto halting = [&](int64_t v, StateKind k) { return spec.kinds[v / (width * nc)] == k; };
    DenseOracle o;
    const bool fixed = spec.head != HeadModel::TwoWay;
    const int64_t steps = fixed ? width : t_max;
    for (int64_t round = 1; round <= steps; ++round) {
        DenseVector next = DenseVector::Zero(dim);
        for (int64_t t = 0; t < tdim; ++t) {
            DenseVector slice(vdim);
            for (int64_t v = 0; v < vdim; ++v) {
                slice[v] = psi[v * tdim + t];
            }
            slice = u * slice;
            for (int64_t v = 0; v < vdim; ++v) {
                next[v * tdim + t] = slice[v];
            }
        }
        psi = next;
        if (spec.head != HeadModel::MeasureOnce || round == steps) {
            for (int64_t i = 0; i < dim; ++i) {
                int64_t v = i / tdim;
                if (halting(v, StateKind::Accepting)) {
                    o.p_acc += std::norm(psi[i]);
                    psi[i] = 0;
                } else if (halting(v, StateKind::Rejecting)) {
                    o.p_rej += std::norm(psi[i]);
                    psi[i] = 0;
                }
            }
        }
        if (round == steps || (!fixed && psi.squaredNorm() < 1e-12)) {
            break;
        }
        if (round <= static_cast<int64_t>(p.rounds().size())) {
            const DenseOperator &w = p.rounds()[round - 1];
            for (int64_t qk = 0; qk < vdim / nc; ++qk) {
                DenseVector block(p.dimension());
                for (int g = 0; g < nc; ++g) {
                    for (int64_t t = 0; t < tdim; ++t) {
                        block[g * tdim + t] = psi[(qk * nc + g) * tdim + t];
                    }
                }
                block = w * block;
                for (int g = 0; g < nc; ++g) {
                    for (int64_t t = 0; t < tdim; ++t) {
                        psi[(qk * nc + g) * tdim + t] = block[g * tdim + t];
                    }
                }
            }
        }
    }
    o.p_cont = psi.squaredNorm();
    return o;
}

/// Haar-like random unitary from the QR factor of a complex Gaussian matrix.
inline DenseOperator random_unitary(int n, std::mt19937_64 &rng) {
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

}  // namespace qip::oracle

#endif
