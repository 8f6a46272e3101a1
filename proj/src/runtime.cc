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

#include <cmath>
#include <map>

#include "qip/errors.h"

namespace qip {

ProverPtr QipSystem::honest_prover(const std::string &x) const {
    if (!honest) {
        return std::make_shared<IdentityProver>();
    }
    return honest(x);
}

Evolution::Evolution(const QfaSpec &spec, const std::string &x) : spec_(spec), x_(x) {
    spec.check_input(x);
    width_ = static_cast<int>(x.size()) + 2;
    ns_ = spec.num_symbols();
    nc_ = spec.num_cells();
    for (int k = 0; k < width_; ++k) {
        symbol_at_.push_back(spec.symbol_at(x, k));
    }
    table_.assign(static_cast<size_t>(spec.num_states()) * ns_ * nc_, nullptr);
    for (const auto &[key, moves] : spec.delta) {
        auto [q, s, c] = key;
        table_[(static_cast<size_t>(q) * ns_ + s) * nc_ + c] = &moves;
    }
    psi_.add(Config{spec.initial, 0, 0, {}}, cd{1, 0});
}

const std::vector<Move> *Evolution::column(int q, int k, int cell) const {
    return table_[(static_cast<size_t>(q) * ns_ + symbol_at_[k]) * nc_ + cell];
}

void Evolution::verifier_step(bool measure_now) {
    JointState next;
    for (const auto &[cfg, a] : psi_) {
        const auto *moves = column(cfg.q, cfg.k, cfg.cell);
        if (moves == nullptr) {
            throw StructureError("verifier has no transition for column (" + spec_.states[cfg.q] + "," +
                                 spec_.symbol_char(symbol_at_[cfg.k]) + "," + spec_.cells[cfg.cell] + ")");
        }
        for (const Move &m : *moves) {
            int k2 = cfg.k + m.dir;
            k2 = k2 < 0 ? k2 + width_ : (k2 >= width_ ? k2 - width_ : k2);
            next.add(Config{m.to, k2, m.cell, cfg.tape}, a * m.amp);
        }
    }
    next.prune(kPruneTol);
    psi_ = std::move(next);
    ++round_;
    if (measure_now) {
        measure();
    }
}

void Evolution::measure() {
    double acc = 0;
    double rej = 0;
    auto &e = psi_.entries();
    for (auto it = e.begin(); it != e.end();) {
        StateKind kind = spec_.kinds[it->first.q];
        if (kind == StateKind::NonHalting) {
            ++it;
            continue;
        }
        (kind == StateKind::Accepting ? acc : rej) += std::norm(it->second);
        it = e.erase(it);
    }
    p_acc_ += acc;
    p_rej_ += rej;
    if (acc > 0 || rej > 0) {
        profile_.push_back({round_, acc, rej});
    }
}

void Evolution::prover_step(const ProverStrategy &p) {
    JointState next;
    std::vector<ProverOut> out;
    for (const auto &[cfg, a] : psi_) {
        out.clear();
        p.apply(round_, cfg.cell, cfg.tape, out);
        for (auto &o : out) {
            if (o.cell < 0 || o.cell >= nc_) {
                throw AlphabetError("prover wrote a symbol outside the communication alphabet");
            }
            next.add(Config{cfg.q, cfg.k, o.cell, std::move(o.tape)}, a * o.amp);
        }
    }
    next.prune(kPruneTol);
    psi_ = std::move(next);
}

double Evolution::conservation_error() const {
    return std::abs(p_acc_ + p_rej_ + psi_.norm2() - 1);
}

int64_t default_t_max(const std::string &x) {
    int64_t w = static_cast<int64_t>(x.size()) + 2;
    return 20 * w * w;
}

RunResult run_spec(const QfaSpec &spec, const ProverStrategy &prover, const std::string &x, int64_t t_max) {
    Evolution ev(spec, x);
    RunResult r;
    const int steps = static_cast<int>(x.size()) + 2;
    auto track = [&] { r.max_conservation_error = std::max(r.max_conservation_error, ev.conservation_error()); };
    switch (spec.head) {
        case HeadModel::MeasureOnce:
            for (int i = 0; i < steps; ++i) {
                ev.verifier_step(false);
                track();
                if (i + 1 < steps) {
                    ev.prover_step(prover);
                    track();
                }
            }
            ev.measure();
            track();
            break;
        case HeadModel::OneWay:
            for (int i = 0; i < steps; ++i) {
                ev.verifier_step(true);
                track();
                if (i + 1 < steps) {
                    ev.prover_step(prover);
                    track();
                }
            }
            if (ev.continuation() > 1e-9) {
                throw StructureError("one-way verifier still running after the right endmarker on input '" + x + "'");
            }
            break;
        case HeadModel::TwoWay: {
            if (t_max <= 0) {
                t_max = default_t_max(x);
            }
            while (ev.round() < t_max) {
                ev.verifier_step(true);
                track();
                if (ev.continuation() < kPruneTol) {
                    break;
                }
                if (ev.round() < t_max) {
                    ev.prover_step(prover);
                    track();
                }
            }
            break;
        }
    }
    r.p_acc = ev.p_acc();
    r.p_rej = ev.p_rej();
    r.p_cont = ev.continuation();
    r.halting_profile = ev.profile();
    r.rounds_executed = ev.round();
    r.truncated = spec.head == HeadModel::TwoWay && r.p_cont >= kPruneTol;
    return r;
}

RunResult run(const QipSystem &system, const ProverStrategy &prover, const std::string &x, int64_t t_max) {
    return run_spec(system.verifier, prover, x, t_max);
}

HaltingTime expected_halting_time(const QipSystem &system, const ProverStrategy &prover, const std::string &x,
                                  int64_t t_max) {
    if (t_max <= 0) {
        t_max = default_t_max(x);
    }
    RunResult r = run(system, prover, x, t_max);
    HaltingTime h;
    for (const auto &rec : r.halting_profile) {
        h.value += rec.round * (rec.acc + rec.rej);
    }
    h.value += static_cast<double>(t_max) * r.p_cont;
    h.upper_bound_known = r.p_cont < 1e-9;
    return h;
}

int count_interactions(const QipSystem &system, const ProverStrategy &prover, const std::string &x, int64_t t_max) {
    const QfaSpec &spec = system.verifier;
    const int steps = static_cast<int>(x.size()) + 2;
    if (t_max <= 0) {
        t_max = spec.head == HeadModel::TwoWay ? default_t_max(x) : steps;
    }
    int64_t rounds = spec.head == HeadModel::TwoWay ? t_max : steps;
    if (!check_committed(prover, spec.num_cells(), static_cast<int>(rounds))) {
        throw ContractError("count_interactions needs a committed prover");
    }
    Evolution ev(spec, x);
    using Tracked = std::map<Config, std::pair<cd, int>>;
    Tracked cur{{Config{spec.initial, 0, 0, {}}, {cd{1, 0}, 0}}};
    int best = 0;
    std::vector<ProverOut> out;
    const bool measure_each = spec.head != HeadModel::MeasureOnce;
    for (int64_t round = 1; round <= rounds && !cur.empty(); ++round) {
        Tracked next;
        for (const auto &[cfg, v] : cur) {
            const auto *moves = ev.column(cfg.q, cfg.k, cfg.cell);
            if (moves == nullptr) {
                throw StructureError("verifier has an unspecified column");
            }
            for (const Move &m : *moves) {
                int k2 = ((cfg.k + m.dir) % ev.width() + ev.width()) % ev.width();
                Config c2{m.to, k2, m.cell, cfg.tape};
                int add = (!spec.is_halting(m.to) && m.cell != 0) ? 1 : 0;
                auto &slot = next[c2];
                slot.first += v.first * m.amp;
                slot.second = std::max(slot.second, v.second + add);
            }
        }
        Tracked kept;
        for (auto &[cfg, v] : next) {
            if (std::abs(v.first) < kPruneTol) {
                continue;
            }
            best = std::max(best, v.second);
            if (measure_each && spec.is_halting(cfg.q)) {
                continue;
            }
            kept.emplace(cfg, v);
        }
        if (round == rounds) {
            break;
        }
        Tracked after;
        for (const auto &[cfg, v] : kept) {
            out.clear();
            prover.apply(static_cast<int>(round), cfg.cell, cfg.tape, out);
            for (auto &o : out) {
                auto &slot = after[Config{cfg.q, cfg.k, o.cell, o.tape}];
                slot.first += v.first * o.amp;
                slot.second = std::max(slot.second, v.second);
            }
        }
        cur.clear();
        for (auto &[cfg, v] : after) {
            if (std::abs(v.first) >= kPruneTol) {
                cur.emplace(cfg, v);
            }
        }
    }
    return best;
}

double query_weight(const QfaSpec &spec, const std::string &prefix, const std::string &y) {
    if (spec.head == HeadModel::TwoWay) {
        throw ContractError("query weight is defined for one-way verifiers only");
    }
    const std::string x = prefix + y;
    Evolution ev(spec, x);
    const int steps = static_cast<int>(x.size()) + 2;
    const int lo = static_cast<int>(prefix.size()) + 1;
    const int hi = static_cast<int>(prefix.size() + y.size());
    double weight = 0;
    for (int i = 0; i < steps; ++i) {
        // The head reads position i during step i + 1.
        ev.verifier_step(true);
        auto &e = ev.state().entries();
        for (auto it = e.begin(); it != e.end();) {
            if (it->first.cell != 0) {
                if (i >= lo && i <= hi) {
                    weight += std::norm(it->second);
                }
                it = e.erase(it);
            } else {
                ++it;
            }
        }
    }
    return weight;
}

}  // namespace qip
