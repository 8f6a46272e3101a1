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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "qip/errors.h"

namespace qip {

std::string head_model_name(HeadModel h) {
    switch (h) {
        case HeadModel::MeasureOnce:
            return "measure_once";
        case HeadModel::OneWay:
            return "one_way";
        case HeadModel::TwoWay:
            return "two_way";
    }
    return "?";
}

HeadModel parse_head_model(const std::string &s) {
    if (s == "measure_once") {
        return HeadModel::MeasureOnce;
    }
    if (s == "one_way") {
        return HeadModel::OneWay;
    }
    if (s == "two_way") {
        return HeadModel::TwoWay;
    }
    throw ParseError("unknown head model: " + s);
}

std::string state_kind_name(StateKind k) {
    switch (k) {
        case StateKind::NonHalting:
            return "non";
        case StateKind::Accepting:
            return "acc";
        case StateKind::Rejecting:
            return "rej";
    }
    return "?";
}

int QfaSpec::symbol_index(char c) const {
    if (c == kLeftEnd) {
        return 0;
    }
    if (c == kRightEnd) {
        return num_symbols() - 1;
    }
    auto p = input_alphabet.find(c);
    if (p == std::string::npos) {
        throw AlphabetError(std::string("symbol '") + c + "' is not in the input alphabet");
    }
    return static_cast<int>(p) + 1;
}

char QfaSpec::symbol_char(int s) const {
    if (s == 0) {
        return kLeftEnd;
    }
    if (s == num_symbols() - 1) {
        return kRightEnd;
    }
    return input_alphabet[s - 1];
}

int QfaSpec::symbol_at(const std::string &x, int k) const {
    if (k == 0) {
        return 0;
    }
    if (k == static_cast<int>(x.size()) + 1) {
        return num_symbols() - 1;
    }
    return symbol_index(x[k - 1]);
}

void QfaSpec::check_input(const std::string &x) const {
    for (char c : x) {
        if (c == kLeftEnd || c == kRightEnd || input_alphabet.find(c) == std::string::npos) {
            throw AlphabetError(std::string("input symbol '") + c + "' is not in the input alphabet");
        }
    }
}

int QfaSpec::find_state(const std::string &name) const {
    auto it = std::find(states.begin(), states.end(), name);
    return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

int QfaSpec::find_cell(const std::string &name) const {
    auto it = std::find(cells.begin(), cells.end(), name);
    return it == cells.end() ? -1 : static_cast<int>(it - cells.begin());
}

int QfaSpec::state_index(const std::string &name) const {
    int q = find_state(name);
    if (q < 0) {
        throw ParseError("unknown state: " + name);
    }
    return q;
}

int QfaSpec::cell_index(const std::string &name) const {
    int c = find_cell(name);
    if (c < 0) {
        throw AlphabetError("unknown communication symbol: " + name);
    }
    return c;
}

int QfaSpec::add_state(const std::string &name, StateKind kind, int dir) {
    if (find_state(name) >= 0) {
        throw ParseError("duplicate state: " + name);
    }
    states.push_back(name);
    kinds.push_back(kind);
    dirs.push_back(dir);
    return num_states() - 1;
}

int QfaSpec::add_cell(const std::string &name) {
    int c = find_cell(name);
    if (c >= 0) {
        return c;
    }
    cells.push_back(name);
    return num_cells() - 1;
}

void QfaSpec::add_move(int q, int sym, int cell, const Move &m) {
    delta[{q, sym, cell}].push_back(m);
}

bool QfaSpec::operator==(const QfaSpec &o) const {
    return head == o.head && input_alphabet == o.input_alphabet && states == o.states && kinds == o.kinds &&
           dirs == o.dirs && initial == o.initial && cells == o.cells && tape_symbols == o.tape_symbols &&
           delta == o.delta;
}

SpecBuilder::SpecBuilder(HeadModel head, std::string input_alphabet) {
    spec_.head = head;
    spec_.input_alphabet = std::move(input_alphabet);
}

int SpecBuilder::state(const std::string &name, StateKind kind, int dir) {
    int q = spec_.find_state(name);
    if (q < 0) {
        return spec_.add_state(name, kind, dir);
    }
    if (spec_.kinds[q] != kind) {
        throw ContractError("state " + name + " declared with two kinds");
    }
    if (dir != kNoDir) {
        if (spec_.dirs[q] != kNoDir && spec_.dirs[q] != dir) {
            throw ContractError("state " + name + " declared with two directions");
        }
        spec_.dirs[q] = dir;
    }
    return q;
}

int SpecBuilder::cell(const std::string &name) {
    return spec_.add_cell(name);
}

void SpecBuilder::set_initial(const std::string &name) {
    spec_.initial = spec_.state_index(name);
}

void SpecBuilder::on(const std::string &q, char sym, const std::string &cell, const std::string &q2,
                     const std::string &cell2, cd amp) {
    int t = spec_.state_index(q2);
    int d = spec_.dirs[t];
    if (d == kNoDir) {
        d = 1;
    }
    on_dir(q, sym, cell, q2, cell2, d, amp);
}

void SpecBuilder::on_dir(const std::string &q, char sym, const std::string &cell, const std::string &q2,
                         const std::string &cell2, int dir, cd amp) {
    Move m;
    m.to = spec_.state_index(q2);
    m.cell = spec_.add_cell(cell2);
    m.dir = dir;
    m.amp = amp;
    spec_.add_move(spec_.state_index(q), spec_.symbol_index(sym), spec_.add_cell(cell), m);
}

bool ValidationReport::ok() const {
    if (!violations.empty()) {
        return false;
    }
    for (const auto &[len, good] : well_formed) {
        if (!good) {
            return false;
        }
    }
    return true;
}

namespace {

int wrap(int k, int mod) {
    int r = k % mod;
    return r < 0 ? r + mod : r;
}

std::string column_name(const QfaSpec &spec, int q, int s, int c) {
    return "(" + spec.states[q] + "," + std::string(1, spec.symbol_char(s)) + "," + spec.cells[c] + ")";
}

std::vector<std::string> inputs_of_length(const std::string &sigma, int len, size_t cap) {
    std::vector<std::string> out;
    if (sigma.empty()) {
        if (len == 0) {
            out.emplace_back();
        }
        return out;
    }
    double total = std::pow(static_cast<double>(sigma.size()), len);
    if (total <= static_cast<double>(cap)) {
        std::vector<int> digits(len, 0);
        while (true) {
            std::string x;
            for (int d : digits) {
                x.push_back(sigma[d]);
            }
            out.push_back(x);
            int i = len - 1;
            while (i >= 0 && ++digits[i] == static_cast<int>(sigma.size())) {
                digits[i] = 0;
                --i;
            }
            if (i < 0) {
                break;
            }
        }
        return out;
    }
    std::mt19937_64 rng(len * 7919 + 17);
    out.push_back(std::string(len, sigma.front()));
    out.push_back(std::string(len, sigma.back()));
    while (out.size() < cap) {
        std::string x;
        for (int i = 0; i < len; ++i) {
            x.push_back(sigma[rng() % sigma.size()]);
        }
        out.push_back(x);
    }
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
};

using SparseCol = std::vector<std::pair<int, cd>>;

}  // namespace

SparseOperator build_step_operator_sparse(const QfaSpec &spec, const std::string &x) {
    spec.check_input(x);
    const int n = static_cast<int>(x.size());
    const int width = n + 2;
    const int nc = spec.num_cells();
    const int64_t dim = static_cast<int64_t>(spec.num_states()) * width * nc;
    std::vector<Eigen::Triplet<cd, int64_t>> trips;
    for (const auto &[key, moves] : spec.delta) {
        auto [q, s, c] = key;
        for (int k = 0; k < width; ++k) {
            if (spec.symbol_at(x, k) != s) {
                continue;
            }
            int64_t col = (static_cast<int64_t>(q) * width + k) * nc + c;
            for (const Move &m : moves) {
                int64_t row = (static_cast<int64_t>(m.to) * width + wrap(k + m.dir, width)) * nc + m.cell;
                trips.emplace_back(row, col, m.amp);
            }
        }
    }
    SparseOperator u(dim, dim);
    u.setFromTriplets(trips.begin(), trips.end());
    u.makeCompressed();
    return u;
}

DenseOperator build_step_operator(const QfaSpec &spec, const std::string &x, int64_t max_dim) {
    SparseOperator u = build_step_operator_sparse(spec, x);
    if (u.rows() > max_dim) {
        throw CapacityError("step operator dimension " + std::to_string(u.rows()) + " exceeds dense cap " +
                            std::to_string(max_dim));
    }
    return DenseOperator(u);
}

std::pair<QfaSpec, ValidationReport> validate_and_complete(const QfaSpec &partial, const std::vector<int> &lengths,
                                                           double tol) {
    QfaSpec spec = partial;
    ValidationReport rep;
    const int nq = spec.num_states();
    if (nq == 0) {
        throw ContractError("verifier has no states");
    }
    if (static_cast<int>(spec.kinds.size()) != nq || static_cast<int>(spec.dirs.size()) != nq) {
        throw ContractError("state tables have inconsistent sizes");
    }
    if (spec.initial < 0 || spec.initial >= nq || spec.is_halting(spec.initial)) {
        throw ContractError("initial state must be a non-halting state");
    }
    if (spec.cells.empty() || spec.cells[0] != kBlank) {
        throw AlphabetError("communication alphabet must start with the blank symbol");
    }
    if (spec.tape_symbols.empty() || spec.tape_symbols[0] != kBlank) {
        throw AlphabetError("prover tape alphabet must start with the blank symbol");
    }
    {
        std::set<char> seen;
        for (char c : spec.input_alphabet) {
            if (c == kLeftEnd || c == kRightEnd || std::isspace(static_cast<unsigned char>(c)) || !seen.insert(c).second) {
                throw AlphabetError(std::string("bad input alphabet symbol '") + c + "'");
            }
        }
    }
    for (auto it = spec.delta.begin(); it != spec.delta.end();) {
        it = it->second.empty() ? spec.delta.erase(it) : std::next(it);
    }

    // Head directions must be a function of the target state.
    bool one_way = spec.head != HeadModel::TwoWay;
    for (const auto &[key, moves] : spec.delta) {
        for (const Move &m : moves) {
            if (m.dir < -1 || m.dir > 1) {
                throw StructureError("head move out of range in column " +
                                     column_name(spec, std::get<0>(key), std::get<1>(key), std::get<2>(key)));
            }
            if (one_way && m.dir != 1) {
                throw StructureError("one-way verifier moves its head by " + std::to_string(m.dir) + " in column " +
                                     column_name(spec, std::get<0>(key), std::get<1>(key), std::get<2>(key)));
            }
            int &d = spec.dirs[m.to];
            if (d == kNoDir) {
                d = m.dir;
            } else if (d != m.dir) {
                throw StructureError("state " + spec.states[m.to] + " is entered with head moves " +
                                     std::to_string(d) + " and " + std::to_string(m.dir));
            }
        }
    }
    for (int &d : spec.dirs) {
        if (d == kNoDir) {
            d = 1;
        }
    }

    const int nc = spec.num_cells();
    const int ns = spec.num_symbols();

    // Orthonormality of the specified columns, symbol by symbol.
    std::vector<std::map<int, SparseCol>> specified(ns);
    for (const auto &[key, moves] : spec.delta) {
        auto [q, s, c] = key;
        std::map<int, cd> acc;
        for (const Move &m : moves) {
            acc[m.to * nc + m.cell] += m.amp;
        }
        SparseCol col(acc.begin(), acc.end());
        specified[s][q * nc + c] = col;
    }
    for (int s = 0; s < ns; ++s) {
        std::map<int, std::vector<std::pair<int, cd>>> by_target;
        for (const auto &[col, img] : specified[s]) {
            double norm = 0;
            for (const auto &[t, a] : img) {
                norm += std::norm(a);
                by_target[t].push_back({col, a});
            }
            if (std::abs(norm - 1) > tol) {
                throw OrthonormalityError("column " + column_name(spec, col / nc, s, col % nc) +
                                          " does not have unit norm");
            }
        }
        std::map<std::pair<int, int>, cd> inner;
        for (const auto &[t, list] : by_target) {
            for (size_t i = 0; i < list.size(); ++i) {
                for (size_t j = i + 1; j < list.size(); ++j) {
                    inner[{list[i].first, list[j].first}] += std::conj(list[i].second) * list[j].second;
                }
            }
        }
        for (const auto &[pair, v] : inner) {
            if (std::abs(v) > tol) {
                throw OrthonormalityError("columns " + column_name(spec, pair.first / nc, s, pair.first % nc) +
                                          " and " + column_name(spec, pair.second / nc, s, pair.second % nc) +
                                          " are not orthogonal");
            }
        }
    }

    // Fresh rejecting states absorb the unspecified columns of non-halting states.
    int need = 0;
    for (int s = 0; s < ns; ++s) {
        int cnt = 0;
        for (int q = 0; q < nq; ++q) {
            if (spec.is_halting(q)) {
                continue;
            }
            for (int c = 0; c < nc; ++c) {
                cnt += !specified[s].count(q * nc + c);
            }
        }
        need = std::max(need, cnt);
    }
    int fresh = (need + nc - 1) / nc;
    std::vector<int> fresh_ids;
    for (int i = 0, serial = 0; i < fresh; ++serial) {
        std::string name = "rej~" + std::to_string(serial);
        if (spec.find_state(name) >= 0) {
            continue;
        }
        fresh_ids.push_back(spec.add_state(name, StateKind::Rejecting, 1));
        ++i;
    }
    rep.fresh_states = fresh;
    const int nq2 = spec.num_states();
    const int dim = nq2 * nc;

    for (int s = 0; s < ns; ++s) {
        const auto &spec_cols = specified[s];
        std::vector<char> used(dim, 0);
        for (const auto &[col, img] : spec_cols) {
            for (const auto &[t, a] : img) {
                used[t] = 1;
            }
        }
        std::vector<char> filled(dim, 0);
        for (const auto &[col, img] : spec_cols) {
            filled[col] = 1;
        }
        auto emit = [&](int col, const SparseCol &img) {
            int q = col / nc;
            int c = col % nc;
            for (const auto &[t, a] : img) {
                Move m;
                m.to = t / nc;
                m.cell = t % nc;
                m.dir = spec.dirs[m.to];
                m.amp = a;
                m.completed = true;
                spec.add_move(q, s, c, m);
            }
            filled[col] = 1;
            ++rep.completed_transitions;
        };

        // Live columns first, onto fresh rejecting basis vectors.
        size_t fresh_cursor = 0;
        std::vector<int> fresh_basis;
        for (int fq : fresh_ids) {
            for (int c = 0; c < nc; ++c) {
                fresh_basis.push_back(fq * nc + c);
            }
        }
        for (int q = 0; q < nq; ++q) {
            if (spec.is_halting(q)) {
                continue;
            }
            for (int c = 0; c < nc; ++c) {
                int col = q * nc + c;
                if (filled[col]) {
                    continue;
                }
                while (fresh_cursor < fresh_basis.size() && used[fresh_basis[fresh_cursor]]) {
                    ++fresh_cursor;
                }
                if (fresh_cursor >= fresh_basis.size()) {
                    throw OrthonormalityError("ran out of fresh rejecting states");
                }
                int t = fresh_basis[fresh_cursor];
                used[t] = 1;
                emit(col, {{t, cd{1, 0}}});
            }
        }

        // Orthogonal complement of the specified images inside the subspaces they touch.
        UnionFind uf(dim);
        for (const auto &[col, img] : spec_cols) {
            for (size_t i = 1; i < img.size(); ++i) {
                uf.unite(img[0].first, img[i].first);
            }
        }
        std::map<int, std::vector<int>> comp_basis;
        std::map<int, std::vector<int>> comp_cols;
        for (const auto &[col, img] : spec_cols) {
            if (img.size() > 1) {
                comp_cols[uf.find(img[0].first)].push_back(col);
            }
        }
        for (const auto &[root, cols] : comp_cols) {
            std::set<int> b;
            for (int col : cols) {
                for (const auto &[t, a] : spec_cols.at(col)) {
                    b.insert(t);
                }
            }
            // Single-entry images may share the component through a common target; include them too.
            comp_basis[root] = std::vector<int>(b.begin(), b.end());
        }
        std::vector<SparseCol> gs_vectors;
        for (const auto &[root, basis] : comp_basis) {
            std::map<int, int> local;
            for (size_t i = 0; i < basis.size(); ++i) {
                local[basis[i]] = static_cast<int>(i);
            }
            std::vector<DenseVector> ortho;
            int member_cols = 0;
            for (const auto &[col, img] : spec_cols) {
                bool inside = true;
                for (const auto &[t, a] : img) {
                    inside = inside && local.count(t);
                }
                if (!inside) {
                    continue;
                }
                DenseVector v = DenseVector::Zero(basis.size());
                for (const auto &[t, a] : img) {
                    v[local[t]] += a;
                }
                ortho.push_back(v);
                ++member_cols;
            }
            int missing = static_cast<int>(basis.size()) - member_cols;
            for (size_t i = 0; i < basis.size() && missing > 0; ++i) {
                DenseVector v = DenseVector::Zero(basis.size());
                v[i] = 1;
                for (int pass = 0; pass < 2; ++pass) {
                    for (const auto &o : ortho) {
                        v -= o * o.dot(v);
                    }
                }
                double nv = v.norm();
                if (nv < 1e-6) {
                    continue;
                }
                v /= nv;
                ortho.push_back(v);
                SparseCol sc;
                for (size_t j = 0; j < basis.size(); ++j) {
                    if (std::abs(v[j]) > 1e-15) {
                        sc.push_back({basis[j], v[j]});
                    }
                }
                gs_vectors.push_back(sc);
                --missing;
            }
        }

        std::vector<int> rest;
        for (int q = 0; q < nq2; ++q) {
            if (!spec.is_halting(q)) {
                continue;
            }
            for (int c = 0; c < nc; ++c) {
                int col = q * nc + c;
                if (filled[col]) {
                    continue;
                }
                if (!used[col]) {
                    used[col] = 1;
                    emit(col, {{col, cd{1, 0}}});
                } else {
                    rest.push_back(col);
                }
            }
        }
        std::vector<SparseCol> targets;
        for (int t = 0; t < dim; ++t) {
            if (!used[t]) {
                targets.push_back({{t, cd{1, 0}}});
            }
        }
        for (auto &g : gs_vectors) {
            targets.push_back(g);
        }
        if (targets.size() != rest.size()) {
            throw OrthonormalityError("completion dimension mismatch on symbol '" +
                                      std::string(1, spec.symbol_char(s)) + "'");
        }
        for (size_t i = 0; i < rest.size(); ++i) {
            emit(rest[i], targets[i]);
        }
    }

    for (int len : lengths) {
        bool good = true;
        for (const std::string &x : inputs_of_length(spec.input_alphabet, len, 64)) {
            double defect = unitarity_defect(build_step_operator_sparse(spec, x));
            if (defect > tol) {
                good = false;
                rep.violations.push_back({x, "step operator deviates from unitary by " + std::to_string(defect)});
                break;
            }
        }
        rep.well_formed[len] = good;
    }
    return {spec, rep};
}

std::string public_cell_name(const QfaSpec &spec, int q, int d) {
    if (spec.head != HeadModel::TwoWay) {
        return spec.states[q];
    }
    return spec.states[q] + "@" + (d > 0 ? "+1" : d < 0 ? "-1" : "0");
}

ValidationReport check_structure(const QfaSpec &spec, StructureMode mode, const std::vector<int> &lengths) {
    ValidationReport rep;
    switch (mode) {
        case StructureMode::Public: {
            for (const auto &[key, moves] : spec.delta) {
                auto [q, s, c] = key;
                if (spec.is_halting(q)) {
                    continue;
                }
                for (const Move &m : moves) {
                    if (spec.is_halting(m.to)) {
                        continue;
                    }
                    std::string want = public_cell_name(spec, m.to, m.dir);
                    if (spec.cells[m.cell] != want) {
                        rep.violations.push_back({"", "column " + column_name(spec, q, s, c) + " enters " +
                                                          spec.states[m.to] + " writing " + spec.cells[m.cell] +
                                                          " instead of " + want});
                    }
                }
            }
            break;
        }
        case StructureMode::MeasureOnce: {
            if (spec.head != HeadModel::MeasureOnce) {
                rep.violations.push_back({"", "head model is " + head_model_name(spec.head)});
            }
            const int right = spec.num_symbols() - 1;
            for (const auto &[key, moves] : spec.delta) {
                auto [q, s, c] = key;
                if (spec.is_halting(q)) {
                    continue;
                }
                for (const Move &m : moves) {
                    if (m.completed) {
                        continue;
                    }
                    bool halts = spec.is_halting(m.to);
                    if (s != right && halts) {
                        rep.violations.push_back(
                            {"", "column " + column_name(spec, q, s, c) + " halts before the right endmarker"});
                    }
                    if (s == right && !halts) {
                        rep.violations.push_back(
                            {"", "column " + column_name(spec, q, s, c) + " does not halt on the right endmarker"});
                    }
                }
            }
            break;
        }
        case StructureMode::OneWayHalting: {
            if (spec.head == HeadModel::TwoWay) {
                rep.violations.push_back({"", "head model is two_way"});
                break;
            }
            const int nc = spec.num_cells();
            for (int len : lengths) {
                bool good = true;
                for (const std::string &x : inputs_of_length(spec.input_alphabet, len, 4096)) {
                    const int width = len + 2;
                    std::map<std::tuple<int, int, int>, cd> psi{{{spec.initial, 0, 0}, cd{1, 0}}};
                    for (int step = 0; step < width; ++step) {
                        std::map<std::tuple<int, int, int>, cd> nxt;
                        for (const auto &[cfg, a] : psi) {
                            auto [q, k, c] = cfg;
                            auto it = spec.delta.find({q, spec.symbol_at(x, k), c});
                            if (it == spec.delta.end()) {
                                continue;
                            }
                            for (const Move &m : it->second) {
                                if (!spec.is_halting(m.to)) {
                                    nxt[{m.to, wrap(k + m.dir, width), m.cell}] += a * m.amp;
                                }
                            }
                        }
                        psi.swap(nxt);
                    }
                    double cont = 0;
                    for (const auto &[cfg, a] : psi) {
                        cont += std::norm(a);
                    }
                    if (cont > 1e-9) {
                        good = false;
                        rep.violations.push_back({x, "continuation " + std::to_string(cont) + " after " +
                                                         std::to_string(width) + " steps"});
                        break;
                    }
                    (void)nc;
                }
                rep.well_formed[len] = good;
            }
            break;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------------------------------------------
// Text format.

namespace {

std::vector<std::string> split_ws(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        out.push_back(tok);
    }
    return out;
}

double parse_real_strict(const std::string &s) {
    if (s.empty()) {
        throw ParseError("empty number");
    }
    char *end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw ParseError("bad number: " + s);
    }
    return v;
}

long parse_int_strict(const std::string &s) {
    char *end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw ParseError("bad integer: " + s);
    }
    return v;
}

std::vector<std::string> split_top_level(const std::string &s, char sep) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        }
        if (c == sep && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

cd parse_factor(const std::string &f) {
    if (f == "i") {
        return {0, 1};
    }
    if (f.rfind("exp(", 0) == 0 && f.back() == ')') {
        std::string inner = f.substr(4, f.size() - 5);
        const std::string prefix = "2*pi*i*";
        if (inner.rfind(prefix, 0) != 0) {
            throw ParseError("exponent must read 2*pi*i*J/N: " + f);
        }
        std::string frac = inner.substr(prefix.size());
        auto slash = frac.find('/');
        if (slash == std::string::npos) {
            throw ParseError("exponent must read 2*pi*i*J/N: " + f);
        }
        long j = parse_int_strict(frac.substr(0, slash));
        long n = parse_int_strict(frac.substr(slash + 1));
        if (n == 0) {
            throw ParseError("zero denominator in " + f);
        }
        long e = ((j % n) + n) % n;
        return std::polar(1.0, 2 * M_PI * static_cast<double>(e) / static_cast<double>(n));
    }
    if (f.rfind("1/sqrt(", 0) == 0 && f.back() == ')') {
        double k = parse_real_strict(f.substr(7, f.size() - 8));
        if (!(k > 0)) {
            throw ParseError("sqrt of non-positive value: " + f);
        }
        return 1.0 / std::sqrt(k);
    }
    if (f.rfind("sqrt(", 0) == 0 && f.back() == ')') {
        double k = parse_real_strict(f.substr(5, f.size() - 6));
        if (k < 0) {
            throw ParseError("sqrt of negative value: " + f);
        }
        return std::sqrt(k);
    }
    auto slash = f.find('/');
    if (slash != std::string::npos) {
        double p = parse_real_strict(f.substr(0, slash));
        double q = parse_real_strict(f.substr(slash + 1));
        if (q == 0) {
            throw ParseError("zero denominator: " + f);
        }
        return p / q;
    }
    return parse_real_strict(f);
}

std::string fmt_double(double v) {
    if (v == 0) {
        return "0";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_dir(int d) {
    return d > 0 ? "+1" : d < 0 ? "-1" : "0";
}

}  // namespace

cd parse_amplitude(const std::string &text) {
    std::string t = text;
    if (t.empty()) {
        throw ParseError("empty amplitude");
    }
    double sign = 1;
    if (t[0] == '-' || t[0] == '+') {
        sign = t[0] == '-' ? -1 : 1;
        t = t.substr(1);
    }
    cd v{sign, 0};
    for (const std::string &f : split_top_level(t, '*')) {
        if (f.empty()) {
            throw ParseError("bad amplitude: " + text);
        }
        v *= parse_factor(f);
    }
    return v;
}

QfaSpec parse_spec(const std::string &text) {
    QfaSpec spec;
    spec.head = HeadModel::TwoWay;
    bool saw_header = false;
    bool saw_init = false;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    struct Pending {
        int line;
        std::vector<std::string> tok;
    };
    std::vector<Pending> pending;
    while (std::getline(ss, line)) {
        ++lineno;
        auto tok = split_ws(line);
        if (tok.empty() || tok[0].rfind("//", 0) == 0) {
            continue;
        }
        const std::string where = "line " + std::to_string(lineno) + ": ";
        const std::string &kw = tok[0];
        if (kw == "qfa") {
            saw_header = true;
        } else if (kw == "head") {
            if (tok.size() != 2) {
                throw ParseError(where + "head needs one argument");
            }
            spec.head = parse_head_model(tok[1]);
        } else if (kw == "sigma") {
            spec.input_alphabet = tok.size() > 1 ? tok[1] : "";
            if (tok.size() > 2) {
                throw ParseError(where + "sigma takes one word of single-character symbols");
            }
            std::string sorted = spec.input_alphabet;
            std::sort(sorted.begin(), sorted.end());
            if (spec.input_alphabet.find_first_of("^$") != std::string::npos ||
                std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                throw ParseError(where + "sigma must not repeat symbols or contain the endmarkers");
            }
        } else if (kw == "cells" || kw == "tape") {
            if (tok.size() < 2 || tok[1] != kBlank) {
                throw ParseError(where + kw + " must list the blank symbol first");
            }
            std::vector<std::string> syms(tok.begin() + 1, tok.end());
            std::set<std::string> uniq(syms.begin(), syms.end());
            if (uniq.size() != syms.size()) {
                throw ParseError(where + "duplicate symbol in " + kw);
            }
            (kw == "cells" ? spec.cells : spec.tape_symbols) = syms;
        } else if (kw == "state") {
            if (tok.size() < 3) {
                throw ParseError(where + "state needs a name and a kind");
            }
            StateKind kind;
            if (tok[2] == "non") {
                kind = StateKind::NonHalting;
            } else if (tok[2] == "acc") {
                kind = StateKind::Accepting;
            } else if (tok[2] == "rej") {
                kind = StateKind::Rejecting;
            } else {
                throw ParseError(where + "state kind must be non, acc or rej");
            }
            int dir = kNoDir;
            bool init = false;
            for (size_t i = 3; i < tok.size(); ++i) {
                if (tok[i] == "init") {
                    init = true;
                } else if (tok[i] == "+1" || tok[i] == "1") {
                    dir = 1;
                } else if (tok[i] == "0") {
                    dir = 0;
                } else if (tok[i] == "-1") {
                    dir = -1;
                } else {
                    throw ParseError(where + "unexpected token " + tok[i]);
                }
            }
            if (spec.find_state(tok[1]) >= 0) {
                throw ParseError(where + "duplicate state " + tok[1]);
            }
            int q = spec.add_state(tok[1], kind, dir);
            if (init) {
                if (saw_init) {
                    throw ParseError(where + "second initial state");
                }
                saw_init = true;
                spec.initial = q;
            }
        } else if (kw == "move") {
            pending.push_back({lineno, tok});
        } else {
            throw ParseError(where + "unknown keyword " + kw);
        }
    }
    if (!saw_header) {
        throw ParseError("missing qfa header line");
    }
    if (!saw_init) {
        throw ParseError("no initial state");
    }
    for (const Pending &p : pending) {
        const std::string where = "line " + std::to_string(p.line) + ": ";
        const auto &tok = p.tok;
        // move q sym cell -> q2 cell2 dir amp [amp_im] [c]
        if (tok.size() < 8 || tok[4] != "->") {
            throw ParseError(where + "move must read: move q sym cell -> q2 cell2 dir amplitude");
        }
        bool completed = false;
        size_t end = tok.size();
        if (tok.back() == "c") {
            completed = true;
            --end;
        }
        if (tok[2].size() != 1) {
            throw ParseError(where + "tape symbol must be a single character");
        }
        int q = spec.find_state(tok[1]);
        int q2 = spec.find_state(tok[5]);
        int c = spec.find_cell(tok[3]);
        int c2 = spec.find_cell(tok[6]);
        if (q < 0 || q2 < 0) {
            throw ParseError(where + "unknown state");
        }
        if (c < 0 || c2 < 0) {
            throw ParseError(where + "unknown communication symbol");
        }
        int sym;
        try {
            sym = spec.symbol_index(tok[2][0]);
        } catch (const AlphabetError &e) {
            throw ParseError(where + e.what());
        }
        int dir;
        if (tok[7] == "D") {
            dir = spec.dirs[q2];
            if (dir == kNoDir) {
                throw ParseError(where + "D used but state " + tok[5] + " has no direction");
            }
        } else if (tok[7] == "+1" || tok[7] == "1") {
            dir = 1;
        } else if (tok[7] == "0") {
            dir = 0;
        } else if (tok[7] == "-1") {
            dir = -1;
        } else {
            throw ParseError(where + "direction must be +1, 0, -1 or D");
        }
        cd amp;
        try {
            if (end == 9) {
                amp = parse_amplitude(tok[8]);
            } else if (end == 10) {
                amp = cd{parse_real_strict(tok[8]), parse_real_strict(tok[9])};
            } else {
                throw ParseError("wrong number of amplitude fields");
            }
        } catch (const ParseError &e) {
            throw ParseError(where + e.what());
        }
        Move m;
        m.to = q2;
        m.cell = c2;
        m.dir = dir;
        m.amp = amp;
        m.completed = completed;
        spec.add_move(q, sym, c, m);
    }
    return spec;
}

QfaSpec load_spec_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

std::string serialize_spec(const QfaSpec &spec) {
    std::ostringstream out;
    out << "qfa\n";
    out << "head " << head_model_name(spec.head) << "\n";
    out << "sigma " << spec.input_alphabet << "\n";
    out << "cells";
    for (const auto &c : spec.cells) {
        out << " " << c;
    }
    out << "\ntape";
    for (const auto &c : spec.tape_symbols) {
        out << " " << c;
    }
    out << "\n";
    for (int q = 0; q < spec.num_states(); ++q) {
        out << "state " << spec.states[q] << " " << state_kind_name(spec.kinds[q]);
        if (q == spec.initial) {
            out << " init";
        }
        if (spec.dirs[q] != kNoDir) {
            out << " " << fmt_dir(spec.dirs[q]);
        }
        out << "\n";
    }
    for (const auto &[key, moves] : spec.delta) {
        auto [q, s, c] = key;
        for (const Move &m : moves) {
            out << "move " << spec.states[q] << " " << spec.symbol_char(s) << " " << spec.cells[c] << " -> "
                << spec.states[m.to] << " " << spec.cells[m.cell] << " " << fmt_dir(m.dir) << " "
                << fmt_double(m.amp.real()) << " " << fmt_double(m.amp.imag());
            if (m.completed) {
                out << " c";
            }
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace qip
