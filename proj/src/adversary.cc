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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "qip/errors.h"

namespace qip {

namespace {

bool steps_fixed(const QfaSpec &spec) {
    return spec.head != HeadModel::TwoWay;
}

int64_t resolve_t_max(const QfaSpec &spec, const std::string &x, int64_t t_max) {
    if (steps_fixed(spec)) {
        return static_cast<int64_t>(x.size()) + 2;
    }
    return t_max > 0 ? t_max : default_t_max(x);
}

using RoundChoice = std::map<std::pair<int, int>, std::pair<int, int>>;

class ClassicalSearch {
   public:
    ClassicalSearch(const QipSystem &system, const std::string &x, const AdversaryBudget &budget)
        : spec_(system.verifier), x_(x), budget_(budget) {
        nc_ = spec_.num_cells();
        mem_ = budget.memory_states;
        if (mem_ < 1 || mem_ > 8) {
            throw DomainError("classical search supports 1..8 memory states");
        }
        if (1 + nc_ * mem_ > 255) {
            throw CapacityError("history symbols do not fit in a tape byte");
        }
        t_max_ = resolve_t_max(spec_, x, budget.t_max);
        measure_each_ = spec_.head != HeadModel::MeasureOnce;
        std::vector<int> perm(mem_);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            perms_.push_back(perm);
        } while (mem_ <= 3 && std::next_permutation(perm.begin(), perm.end()));
    }

    void run() {
        Evolution ev(spec_, x_);
        ev.verifier_step(measure_each_);
        dfs(ev);
    }

    double best = -1;
    std::vector<std::pair<int, RoundChoice>> best_path;
    std::vector<int> best_recording;
    int64_t nodes = 0;
    int64_t leaves = 0;
    bool aborted = false;

   private:
    bool terminal(const Evolution &ev) const {
        if (steps_fixed(spec_)) {
            return ev.round() >= static_cast<int>(x_.size()) + 2;
        }
        return ev.continuation() < kPruneTol || ev.round() >= t_max_;
    }

    std::string canonical(const Evolution &ev) const {
        std::string best_key;
        for (const auto &perm : perms_) {
            std::vector<std::string> rows;
            for (const auto &[cfg, a] : ev.state()) {
                std::string t = cfg.tape;
                if (!t.empty()) {
                    t[0] = static_cast<char>(perm[static_cast<unsigned char>(t[0])]);
                    for (size_t i = 1; i < t.size(); ++i) {
                        int h = static_cast<unsigned char>(t[i]) - 1;
                        t[i] = static_cast<char>(1 + (h / mem_) * mem_ + perm[h % mem_]);
                    }
                }
                std::ostringstream s;
                s << cfg.q << ',' << cfg.k << ',' << cfg.cell << ',' << t.size() << ':' << t << ','
                  << std::llround(a.real() * 1e10) << ',' << std::llround(a.imag() * 1e10) << ';';
                rows.push_back(s.str());
            }
            std::sort(rows.begin(), rows.end());
            std::string key = std::to_string(ev.round()) + "|";
            for (const auto &r : rows) {
                key += r;
            }
            if (best_key.empty() || key < best_key) {
                best_key = key;
            }
        }
        return best_key;
    }

    void dfs(const Evolution &ev) {
        if (aborted) {
            return;
        }
        if (++nodes > budget_.node_cap) {
            aborted = true;
            return;
        }
        if (terminal(ev)) {
            ++leaves;
            double pa = ev.p_acc();
            if (!measure_each_) {
                Evolution fin(ev);
                fin.measure();
                pa = fin.p_acc();
            }
            if (pa > best + 1e-12) {
                best = pa;
                best_path = path_;
                best_recording = recording_;
            }
            return;
        }
        if (ev.p_acc() + ev.continuation() <= best + 1e-12) {
            return;
        }
        std::string key = canonical(ev);
        auto it = memo_.find(key);
        if (it != memo_.end() && it->second >= ev.p_acc() - 1e-12) {
            return;
        }
        memo_[key] = ev.p_acc();

        const int round = ev.round();
        if (budget_.steps > 0 && round > budget_.steps) {
            Evolution child(ev);
            child.prover_step(IdentityProver());
            child.verifier_step(measure_each_);
            dfs(child);
            return;
        }
        std::set<std::pair<int, int>> pair_set;
        for (const auto &[cfg, a] : ev.state()) {
            pair_set.insert({cfg.cell, cfg.tape.empty() ? 0 : static_cast<unsigned char>(cfg.tape[0])});
        }
        std::vector<std::pair<int, int>> pairs(pair_set.begin(), pair_set.end());
        const int options = nc_ * mem_;
        std::vector<int> pick(pairs.size(), 0);
        while (!aborted) {
            RoundChoice choice;
            std::set<int> images;
            for (size_t i = 0; i < pairs.size(); ++i) {
                choice[pairs[i]] = {pick[i] / mem_, pick[i] % mem_};
                images.insert(pick[i]);
            }
            const bool record = images.size() < pairs.size();
            Evolution child(ev);
            JointState next;
            for (const auto &[cfg, a] : ev.state()) {
                int m = cfg.tape.empty() ? 0 : static_cast<unsigned char>(cfg.tape[0]);
                auto [g2, m2] = choice.at({cfg.cell, m});
                Tape t = cfg.tape;
                if (t.empty()) {
                    t.push_back(0);
                }
                t[0] = static_cast<char>(m2);
                if (record) {
                    t.push_back(static_cast<char>(1 + cfg.cell * mem_ + m));
                }
                strip_tape(t);
                next.add(Config{cfg.q, cfg.k, g2, std::move(t)}, a);
            }
            child.state() = std::move(next);
            child.verifier_step(measure_each_);
            path_.push_back({round, choice});
            recording_.push_back(record);
            dfs(child);
            path_.pop_back();
            recording_.pop_back();
            size_t i = pairs.size();
            while (i > 0) {
                --i;
                if (++pick[i] < options) {
                    break;
                }
                pick[i] = 0;
                if (i == 0) {
                    return;
                }
            }
            if (pairs.empty()) {
                return;
            }
        }
    }

    const QfaSpec &spec_;
    std::string x_;
    AdversaryBudget budget_;
    int nc_;
    int mem_;
    int64_t t_max_;
    bool measure_each_;
    std::vector<std::vector<int>> perms_;
    std::unordered_map<std::string, double> memo_;
    std::vector<std::pair<int, RoundChoice>> path_;
    std::vector<int> recording_;
};

}  // namespace

AdversaryReport best_classical_prover(const QipSystem &system, const std::string &x, const AdversaryBudget &budget) {
    system.verifier.check_input(x);
    ClassicalSearch search(system, x, budget);
    search.run();
    AdversaryReport rep;
    rep.seed = budget.seed;
    rep.strategies_tested = search.leaves;
    rep.is_exhaustive = !search.aborted;
    auto table = std::make_shared<ClassicalTable>();
    table->num_cells = system.verifier.num_cells();
    table->memory_states = budget.memory_states;
    for (size_t i = 0; i < search.best_path.size(); ++i) {
        const auto &[round, choice] = search.best_path[i];
        for (const auto &[in, out] : choice) {
            table->set(round, in.first, in.second, out.first, out.second);
        }
        if (search.best_recording[i]) {
            table->allow_recording = true;
        }
    }
    auto prover = std::make_shared<ClassicalProver>(*table);
    RunResult r = run(system, *prover, x, budget.t_max);
    rep.best_p_acc = r.p_acc;
    rep.strategy = prover;
    rep.classical = table;
    rep.best_strategy = serialize_classical(*table, system.verifier);
    return rep;
}

// ---------------------------------------------------------------------------------------------------------------
// Bounded-tape quantum strategies.

int QuantumStrategy::dimension() const {
    int d = num_cells;
    for (int j = 0; j < c; ++j) {
        d *= tape_alphabet;
    }
    return d;
}

namespace {

void apply_rotations(DenseOperator &u, const std::vector<double> &p) {
    const int d = static_cast<int>(u.rows());
    int idx = 0;
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b, idx += 2) {
            const double th = p[idx];
            const double ph = p[idx + 1];
            if (th == 0 && ph == 0) {
                continue;
            }
            const double cs = std::cos(th);
            const double sn = std::sin(th);
            const cd e = std::polar(1.0, ph);
            Eigen::RowVectorXcd ra = u.row(a);
            Eigen::RowVectorXcd rb = u.row(b);
            u.row(a) = cs * ra - std::conj(e) * sn * rb;
            u.row(b) = e * sn * ra + cs * rb;
        }
    }
    for (int a = 0; a < d; ++a) {
        const double al = p[idx + a];
        if (al != 0) {
            u.row(a) *= std::polar(1.0, al);
        }
    }
}

}  // namespace

DenseOperator QuantumStrategy::round_unitary(int round) const {
    const int d = dimension();
    DenseOperator u = DenseOperator::Zero(d, d);
    const auto &perm = base[round];
    for (int j = 0; j < d; ++j) {
        u(perm[j], j) = 1;
    }
    apply_rotations(u, params[round]);
    return u;
}

std::shared_ptr<DenseProver> QuantumStrategy::prover() const {
    std::vector<DenseOperator> rounds;
    for (size_t r = 0; r < params.size(); ++r) {
        rounds.push_back(round_unitary(static_cast<int>(r)));
    }
    return std::make_shared<DenseProver>(num_cells, tape_alphabet, c, std::move(rounds));
}

namespace {

/// Dense-block simulator: one vector over cell (x) tape per (state, head) pair.
class DenseEvaluator {
   public:
    DenseEvaluator(const QipSystem &system, const std::string &x, int dim, int tape_size, int64_t t_max)
        : spec_(system.verifier), ev_(spec_, x), x_(x), dim_(dim), tsize_(tape_size) {
        t_max_ = resolve_t_max(spec_, x, t_max);
        width_ = static_cast<int>(x.size()) + 2;
    }

    double evaluate(const std::vector<DenseOperator> &rounds) const {
        std::map<int, Eigen::VectorXcd> psi;
        Eigen::VectorXcd init = Eigen::VectorXcd::Zero(dim_);
        init[0] = 1;
        psi[spec_.initial * width_] = init;
        double acc = 0;
        const bool each = spec_.head != HeadModel::MeasureOnce;
        const int nc = spec_.num_cells();
        for (int64_t round = 1; round <= t_max_; ++round) {
            std::map<int, Eigen::VectorXcd> next;
            for (const auto &[v, vec] : psi) {
                const int q = v / width_;
                const int k = v % width_;
                for (int g = 0; g < nc; ++g) {
                    auto seg = vec.segment(static_cast<int64_t>(g) * tsize_, tsize_);
                    if (seg.squaredNorm() < 1e-30) {
                        continue;
                    }
                    const auto *moves = ev_.column(q, k, g);
                    if (moves == nullptr) {
                        throw StructureError("verifier has an unspecified column");
                    }
                    for (const Move &m : *moves) {
                        int k2 = ((k + m.dir) % width_ + width_) % width_;
                        auto it = next.find(m.to * width_ + k2);
                        if (it == next.end()) {
                            it = next.emplace(m.to * width_ + k2, Eigen::VectorXcd::Zero(dim_)).first;
                        }
                        it->second.segment(static_cast<int64_t>(m.cell) * tsize_, tsize_) += m.amp * seg;
                    }
                }
            }
            psi.swap(next);
            const bool last_fixed = steps_fixed(spec_) && round == t_max_;
            if (each || last_fixed) {
                for (auto it = psi.begin(); it != psi.end();) {
                    const int q = it->first / width_;
                    if (spec_.is_halting(q)) {
                        if (spec_.kinds[q] == StateKind::Accepting) {
                            acc += it->second.squaredNorm();
                        }
                        it = psi.erase(it);
                    } else {
                        ++it;
                    }
                }
            }
            double cont = 0;
            for (const auto &[v, vec] : psi) {
                cont += vec.squaredNorm();
            }
            if (round == t_max_ || (!steps_fixed(spec_) && cont < kPruneTol)) {
                break;
            }
            if (round <= static_cast<int64_t>(rounds.size())) {
                const auto &u = rounds[round - 1];
                for (auto &[v, vec] : psi) {
                    vec = u * vec;
                }
            }
        }
        return acc;
    }

   private:
    const QfaSpec &spec_;
    Evolution ev_;
    std::string x_;
    int dim_;
    int tsize_;
    int64_t t_max_;
    int width_;
};

int ipow(int b, int e) {
    int r = 1;
    for (int i = 0; i < e; ++i) {
        r *= b;
    }
    return r;
}

}  // namespace

double evaluate_quantum(const QipSystem &system, const std::string &x, const QuantumStrategy &s, int64_t t_max) {
    if (s.num_cells != system.verifier.num_cells()) {
        throw DimensionError("strategy cell alphabet does not match the verifier");
    }
    DenseEvaluator ev(system, x, s.dimension(), ipow(s.tape_alphabet, s.c), t_max);
    std::vector<DenseOperator> rounds;
    for (size_t r = 0; r < s.params.size(); ++r) {
        rounds.push_back(s.round_unitary(static_cast<int>(r)));
    }
    return ev.evaluate(rounds);
}

AdversaryReport search_quantum_prover(const QipSystem &system, const std::string &x, int c,
                                      const AdversaryBudget &budget, const AdversaryReport *classical_seed) {
    system.verifier.check_input(x);
    if (c < 1) {
        throw DomainError("quantum search needs at least one tape cell");
    }
    const int nc = system.verifier.num_cells();
    const int dlt = budget.tape_alphabet > 0 ? budget.tape_alphabet : std::max(nc, budget.memory_states);
    int64_t dim64 = nc;
    for (int j = 0; j < c; ++j) {
        dim64 *= dlt;
        if (dim64 > budget.max_dim) {
            break;
        }
    }
    if (dim64 > budget.max_dim) {
        throw CapacityError("prover dimension exceeds the configured cap of " + std::to_string(budget.max_dim));
    }
    const int dim = static_cast<int>(dim64);
    const int tsize = dim / nc;

    int rounds = budget.steps;
    if (rounds <= 0) {
        RunResult id = run(system, IdentityProver(), x, budget.t_max);
        rounds = std::max(1, id.rounds_executed);
        if (classical_seed && classical_seed->strategy) {
            RunResult cr = run(system, *classical_seed->strategy, x, budget.t_max);
            rounds = std::max(rounds, cr.rounds_executed);
        }
        rounds = std::min(rounds, 256);
    }
    const int nparams = dim * dim;

    QuantumStrategy proto;
    proto.num_cells = nc;
    proto.tape_alphabet = dlt;
    proto.c = c;
    std::vector<int> ident(dim);
    std::iota(ident.begin(), ident.end(), 0);
    proto.base.assign(rounds, ident);
    proto.params.assign(rounds, std::vector<double>(nparams, 0.0));

    // The classical seed fits when it keeps no history and its memory fits in tape cell 0.
    std::vector<std::vector<int>> classical_base;
    if (classical_seed && classical_seed->classical && !classical_seed->classical->allow_recording &&
        classical_seed->classical->memory_states <= dlt) {
        ClassicalProver cp(*classical_seed->classical);
        const int mm = cp.table().memory_states;
        const int high = tsize / dlt;
        classical_base.assign(rounds, ident);
        for (int r = 0; r < rounds; ++r) {
            const auto &map = cp.round_map(r + 1);
            for (int idx = 0; idx < dim; ++idx) {
                int g = idx / tsize;
                int t = idx % tsize;
                int m = t / high;
                int rest = t % high;
                if (m >= mm) {
                    continue;
                }
                auto [g2, m2] = map[g * mm + m];
                classical_base[r][idx] = g2 * tsize + m2 * high + rest;
            }
        }
    }

    DenseEvaluator evaluator(system, x, dim, tsize, budget.t_max);
    std::mt19937_64 rng(budget.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 2 * M_PI);

    AdversaryReport rep;
    rep.seed = budget.seed;
    rep.best_p_acc = -1;
    int64_t tested = 0;
    const int restarts = std::max(budget.restarts, 1);
    for (int rs = 0; rs < restarts + 1; ++rs) {
        QuantumStrategy s = proto;
        if (rs == 1) {
            if (classical_base.empty()) {
                continue;
            }
            s.base = classical_base;
        } else if (rs >= 2) {
            const bool wide = rs % 2 == 1;
            for (auto &p : s.params) {
                for (auto &v : p) {
                    v = wide ? unif(rng) : 0.3 * gauss(rng);
                }
            }
        }
        std::vector<DenseOperator> us;
        for (int r = 0; r < rounds; ++r) {
            us.push_back(s.round_unitary(r));
        }
        double val = evaluator.evaluate(us);
        ++tested;
        for (int it = 0; it < budget.iterations; ++it) {
            const int r = static_cast<int>(rng() % rounds);
            const int idx = static_cast<int>(rng() % nparams);
            const double sigma = 0.01 + (M_PI / 2) * (1.0 - static_cast<double>(it) / budget.iterations);
            const double old = s.params[r][idx];
            s.params[r][idx] = old + sigma * gauss(rng);
            DenseOperator saved = us[r];
            us[r] = s.round_unitary(r);
            double nv = evaluator.evaluate(us);
            ++tested;
            if (nv > val + 1e-12) {
                val = nv;
            } else {
                s.params[r][idx] = old;
                us[r] = saved;
            }
        }
        if (val > rep.best_p_acc + 1e-12) {
            rep.best_p_acc = val;
            rep.best_restart = rs;
            rep.quantum = std::make_shared<QuantumStrategy>(s);
        }
    }
    rep.strategies_tested = tested;
    rep.is_exhaustive = false;
    rep.strategy = rep.quantum->prover();
    std::ostringstream d;
    d << "quantum restart=" << rep.best_restart << " seed=" << budget.seed << " dim=" << dim << " rounds=" << rounds;
    rep.best_strategy = d.str();
    if (classical_seed && classical_seed->best_p_acc > rep.best_p_acc + 1e-12) {
        // The classical best needs history records and has no bounded-tape form; it still bounds the search.
        rep.best_p_acc = classical_seed->best_p_acc;
        rep.best_strategy = classical_seed->best_strategy;
        rep.strategy = classical_seed->strategy;
        rep.classical = classical_seed->classical;
        rep.quantum.reset();
        rep.best_restart = -1;
    }
    return rep;
}

std::vector<ProverPtr> tampering_suite(const QipSystem &system, const std::string &x, int64_t t_max) {
    const int nc = system.verifier.num_cells();
    RunResult id = run(system, IdentityProver(), x, t_max);
    const int rounds = id.rounds_executed;
    std::vector<ProverPtr> out;
    for (int s = 1; s < std::min(nc, 4); ++s) {
        for (int r = 0; r <= rounds; ++r) {
            // r == 0 shifts at every round.
            out.push_back(std::make_shared<FunctionProver>(
                [s, r, nc](int round, int cell, const Tape &y, std::vector<ProverOut> &o) {
                    int c2 = (r == 0 || round == r) ? (cell + s) % nc : cell;
                    o.push_back({c2, y, cd{1, 0}});
                },
                "shift " + std::to_string(s) + (r == 0 ? " every round" : " at round " + std::to_string(r))));
        }
    }
    return out;
}

SuiteResult adversary_suite(const QipSystem &system, const std::string &x, const AdversaryBudget &budget,
                            bool quantum) {
    SuiteResult res;
    auto consider = [&](double p, const std::string &who) {
        if (p > res.max_p_acc + 1e-12 || res.best.empty()) {
            res.max_p_acc = std::max(res.max_p_acc, p);
            res.best = who;
        }
    };
    consider(run(system, IdentityProver(), x, budget.t_max).p_acc, "identity");
    consider(run(system, *system.honest_prover(x), x, budget.t_max).p_acc, "honest");
    for (const auto &p : tampering_suite(system, x, budget.t_max)) {
        consider(run(system, *p, x, budget.t_max).p_acc, p->describe());
    }
    AdversaryReport cl = best_classical_prover(system, x, budget);
    res.classical_exhaustive = cl.is_exhaustive;
    consider(cl.best_p_acc, "classical");
    if (quantum) {
        AdversaryReport qr = search_quantum_prover(system, x, 1, budget, &cl);
        consider(qr.best_p_acc, qr.best_strategy);
    }
    return res;
}

}  // namespace qip
