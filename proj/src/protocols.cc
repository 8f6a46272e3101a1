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

#include "qip/protocols.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "qip/errors.h"

namespace qip {

namespace {

constexpr auto kNon = StateKind::NonHalting;
constexpr auto kAcc = StateKind::Accepting;
constexpr auto kRej = StateKind::Rejecting;

QipSystem finish(const std::string &name, const QfaSpec &partial) {
    QipSystem s;
    s.name = name;
    s.source = partial;
    s.verifier = validate_and_complete(partial, {}).first;
    return s;
}

std::string tape_string(const std::string &x) {
    return std::string(1, kLeftEnd) + x + std::string(1, kRightEnd);
}

}  // namespace

// ---------------------------------------------------------------------------------------------------------------
// Automata.

void Dfa::validate() const {
    const int ns = static_cast<int>(states.size());
    if (ns == 0 || start < 0 || start >= ns || static_cast<int>(accepting.size()) != ns ||
        static_cast<int>(next.size()) != ns) {
        throw ContractError("malformed DFA");
    }
    for (const auto &row : next) {
        if (row.size() != alphabet.size()) {
            throw ContractError("DFA transition row has the wrong width");
        }
        for (int t : row) {
            if (t < 0 || t >= ns) {
                throw ContractError("DFA transition leaves the state set");
            }
        }
    }
}

bool Dfa::accepts(const std::string &x) const {
    int p = start;
    for (char c : x) {
        auto pos = alphabet.find(c);
        if (pos == std::string::npos) {
            throw AlphabetError(std::string("symbol '") + c + "' is not in the DFA alphabet");
        }
        p = next[p][pos];
    }
    return accepting[p];
}

Dfa builtin_dfa(const std::string &name) {
    Dfa d;
    d.alphabet = "01";
    if (name == "zero" || name == "ends1") {
        int hit = name == "zero" ? 0 : 1;
        d.states = {"A", "B"};
        d.accepting = {false, true};
        d.next.assign(2, std::vector<int>(2));
        for (int p = 0; p < 2; ++p) {
            d.next[p][hit] = 1;
            d.next[p][1 - hit] = 0;
        }
    } else if (name == "even_ones") {
        d.states = {"E", "O"};
        d.accepting = {true, false};
        d.next = {{0, 1}, {1, 0}};
    } else {
        throw DomainError("unknown DFA: " + name);
    }
    return d;
}

void Rfa::validate() const {
    const int ns = static_cast<int>(states.size());
    if (ns == 0 || start < 0 || start >= ns || static_cast<int>(kinds.size()) != ns || kinds[start] != kNon) {
        throw ContractError("malformed reversible automaton");
    }
    std::map<char, std::map<int, int>> seen;
    for (const auto &[key, q] : step) {
        auto [p, c] = key;
        if (p < 0 || p >= ns || q < 0 || q >= ns) {
            throw ContractError("reversible automaton transition leaves the state set");
        }
        if (c != kLeftEnd && c != kRightEnd && alphabet.find(c) == std::string::npos) {
            throw AlphabetError(std::string("symbol '") + c + "' is not in the automaton alphabet");
        }
        if (kinds[p] != kNon) {
            throw ContractError("halting state " + states[p] + " has an outgoing transition");
        }
        if (q == start) {
            throw ContractError("the initial state is re-entered");
        }
        if (c == kLeftEnd && p != start) {
            continue;
        }
        if (c == kLeftEnd && kinds[q] != kNon) {
            throw ContractError("the automaton halts on the left endmarker");
        }
        auto [it, fresh] = seen[c].try_emplace(q, p);
        if (!fresh) {
            throw ReversibilityError("states " + states[it->second] + " and " + states[p] + " both go to " +
                                     states[q] + " on '" + std::string(1, c) + "'");
        }
    }
}

bool Rfa::accepts(const std::string &x) const {
    auto it = step.find({start, kLeftEnd});
    if (it == step.end()) {
        return false;
    }
    int p = it->second;
    for (char c : x + std::string(1, kRightEnd)) {
        if (kinds[p] != kNon) {
            break;
        }
        auto jt = step.find({p, c});
        if (jt == step.end()) {
            return false;
        }
        p = jt->second;
    }
    return kinds[p] == kAcc;
}

Rfa builtin_rfa(const std::string &name) {
    Rfa r;
    r.alphabet = "a";
    if (name == "even") {
        r.states = {"s", "e", "o", "acc_e", "rej_o"};
        r.kinds = {kNon, kNon, kNon, kAcc, kRej};
        r.step = {{{0, '^'}, 1}, {{1, 'a'}, 2}, {{2, 'a'}, 1}, {{1, '$'}, 3}, {{2, '$'}, 4}};
    } else if (name == "all") {
        r.states = {"s", "e", "acc"};
        r.kinds = {kNon, kNon, kAcc};
        r.step = {{{0, '^'}, 1}, {{1, 'a'}, 1}, {{1, '$'}, 2}};
    } else {
        throw DomainError("unknown reversible automaton: " + name);
    }
    r.validate();
    return r;
}

void Npfa::validate() const {
    const int ns = static_cast<int>(states.size());
    if (ns == 0 || start < 0 || start >= ns || static_cast<int>(kinds.size()) != ns) {
        throw ContractError("malformed npfa");
    }
    if (kinds[start] == Kind::Accept || kinds[start] == Kind::Reject) {
        throw ContractError("npfa starts in a halting state");
    }
    for (const auto &[key, opts] : moves) {
        auto [p, c] = key;
        if (p < 0 || p >= ns) {
            throw ContractError("npfa transition from an unknown state");
        }
        if (c != kLeftEnd && c != kRightEnd && alphabet.find(c) == std::string::npos) {
            throw AlphabetError(std::string("symbol '") + c + "' is not in the npfa alphabet");
        }
        if (kinds[p] == Kind::Accept || kinds[p] == Kind::Reject) {
            throw ContractError("halting npfa state " + states[p] + " has moves");
        }
        for (auto [q, d] : opts) {
            if (q < 0 || q >= ns) {
                throw ContractError("npfa transition to an unknown state");
            }
            if (d != 1 && d != -1) {
                throw ContractError("npfa head moves must be +1 or -1");
            }
        }
        if (kinds[p] == Kind::Coin) {
            if (opts.size() != 2 || opts[0].second != 1 || opts[1].second != 1 || opts[0].first == opts[1].first) {
                throw ContractError("coin state " + states[p] + " needs two distinct successors moving right");
            }
        }
    }
}

const std::vector<std::pair<int, int>> &Npfa::options(int p, char sym) const {
    static const std::vector<std::pair<int, int>> none;
    auto it = moves.find({p, sym});
    return it == moves.end() ? none : it->second;
}

Npfa builtin_npfa(const std::string &name) {
    using K = Npfa::Kind;
    Npfa m;
    if (name == "det") {
        m.alphabet = "a";
        m.states = {"s0", "s1", "s2", "acc", "rej"};
        m.kinds = {K::Choice, K::Choice, K::Choice, K::Accept, K::Reject};
        m.moves = {{{0, '^'}, {{1, 1}}}, {{1, 'a'}, {{2, 1}}}, {{1, '$'}, {{4, 1}}},
                   {{2, 'a'}, {{4, 1}}}, {{2, '$'}, {{3, 1}}}};
    } else if (name == "coin") {
        m.alphabet = "a";
        m.states = {"s0", "c", "acc", "rej"};
        m.kinds = {K::Choice, K::Coin, K::Accept, K::Reject};
        m.moves = {{{0, '^'}, {{1, 1}}}, {{1, 'a'}, {{2, 1}, {3, 1}}}, {{1, '$'}, {{2, 1}, {3, 1}}}};
    } else if (name == "choice") {
        m.alphabet = "ab";
        m.states = {"s0", "n", "bk", "acc", "rej"};
        m.kinds = {K::Choice, K::Choice, K::Choice, K::Accept, K::Reject};
        m.moves = {{{0, '^'}, {{1, 1}}},          {{1, 'a'}, {{1, 1}, {3, 1}}}, {{1, 'b'}, {{1, 1}}},
                   {{1, '$'}, {{2, -1}}},         {{2, 'a'}, {{2, -1}}},        {{2, 'b'}, {{2, -1}}},
                   {{2, '^'}, {{4, 1}}}};
    } else {
        throw DomainError("unknown npfa: " + name);
    }
    m.validate();
    return m;
}

NpfaStrategy npfa_optimal_strategy(const Npfa &m, const std::string &x) {
    using K = Npfa::Kind;
    const int ns = static_cast<int>(m.states.size());
    const int w = static_cast<int>(x.size()) + 2;
    const std::string tape = tape_string(x);
    auto wrap = [w](int k) { return ((k % w) + w) % w; };
    std::vector<std::vector<double>> v(ns, std::vector<double>(w, 0.0));
    for (int p = 0; p < ns; ++p) {
        if (m.kinds[p] == K::Accept) {
            std::fill(v[p].begin(), v[p].end(), 1.0);
        }
    }
    auto sweep = [&](std::vector<std::vector<double>> &cur) {
        double change = 0;
        auto nxt = cur;
        for (int p = 0; p < ns; ++p) {
            if (m.kinds[p] == K::Accept || m.kinds[p] == K::Reject) {
                continue;
            }
            for (int k = 0; k < w; ++k) {
                const auto &opts = m.options(p, tape[k]);
                double val = 0;
                if (m.kinds[p] == K::Coin && opts.size() == 2) {
                    val = 0.5 * (cur[opts[0].first][wrap(k + 1)] + cur[opts[1].first][wrap(k + 1)]);
                } else if (m.kinds[p] == K::Choice) {
                    for (auto [q, d] : opts) {
                        val = std::max(val, cur[q][wrap(k + d)]);
                    }
                }
                change = std::max(change, std::abs(val - cur[p][k]));
                nxt[p][k] = val;
            }
        }
        cur.swap(nxt);
        return change;
    };
    const int max_iter = 200000;
    auto fin = v;
    for (int it = 0; it < max_iter && sweep(fin) > 1e-15; ++it) {
    }
    // Second pass records when each value first came within tolerance of its limit.
    std::vector<std::vector<int>> settled(ns, std::vector<int>(w, max_iter));
    auto cur = v;
    for (int it = 0; it <= max_iter; ++it) {
        bool all = true;
        for (int p = 0; p < ns; ++p) {
            for (int k = 0; k < w; ++k) {
                if (settled[p][k] == max_iter) {
                    if (cur[p][k] >= fin[p][k] - 1e-12) {
                        settled[p][k] = it;
                    } else {
                        all = false;
                    }
                }
            }
        }
        if (all) {
            break;
        }
        sweep(cur);
    }
    NpfaStrategy s;
    s.width = w;
    s.choice.assign(ns, std::vector<int>(w, -1));
    for (int p = 0; p < ns; ++p) {
        if (m.kinds[p] != K::Choice) {
            continue;
        }
        for (int k = 0; k < w; ++k) {
            const auto &opts = m.options(p, tape[k]);
            int best = -1;
            for (size_t i = 0; i < opts.size(); ++i) {
                auto [q, d] = opts[i];
                int k2 = wrap(k + d);
                if (fin[q][k2] < fin[p][k] - 1e-12) {
                    continue;
                }
                if (best < 0 || settled[q][k2] < settled[opts[best].first][wrap(k + opts[best].second)]) {
                    best = static_cast<int>(i);
                }
            }
            if (best < 0 && !opts.empty()) {
                best = 0;
            }
            s.choice[p][k] = best;
        }
    }
    s.value = fin[m.start][0];
    return s;
}

// ---------------------------------------------------------------------------------------------------------------
// Languages.

std::string LanguageId::alphabet() const {
    if (!alphabet_override.empty()) {
        return alphabet_override;
    }
    switch (kind) {
        case Lang::La:
            return "a";
        case Lang::PalSharp:
            return "01#";
        case Lang::Regular:
            return dfa->alphabet;
        case Lang::Reversible:
            return rfa->alphabet;
        case Lang::TwoWayPfa:
            return npfa->alphabet;
        case Lang::Union:
            return left->alphabet();
        default:
            return "01";
    }
}

LanguageId language(Lang kind) {
    LanguageId l;
    l.kind = kind;
    return l;
}

LanguageId parse_language(const std::string &name) {
    static const std::map<std::string, Lang> table{
        {"zero", Lang::Zero}, {"upal", Lang::Upal}, {"pal_sharp", Lang::PalSharp}, {"center", Lang::Center},
        {"la", Lang::La},     {"odd", Lang::Odd},   {"empty", Lang::Empty},        {"universal", Lang::Universal}};
    auto it = table.find(name);
    if (it != table.end()) {
        return language(it->second);
    }
    if (name.rfind("dfa:", 0) == 0) {
        LanguageId l = language(Lang::Regular);
        l.dfa = std::make_shared<Dfa>(builtin_dfa(name.substr(4)));
        return l;
    }
    throw DomainError("unknown language: " + name);
}

bool membership(const LanguageId &lang, const std::string &x) {
    const std::string sigma = lang.alphabet();
    for (char c : x) {
        if (sigma.find(c) == std::string::npos) {
            throw AlphabetError(std::string("symbol '") + c + "' is not in the language alphabet");
        }
    }
    const size_t n = x.size();
    switch (lang.kind) {
        case Lang::Zero:
            return n > 0 && x.back() == '0';
        case Lang::Upal: {
            size_t m = x.find_first_not_of('0');
            if (m == std::string::npos) {
                return n == 0;
            }
            return x.find_first_not_of('1', m) == std::string::npos && n - m == m;
        }
        case Lang::PalSharp: {
            if (std::count(x.begin(), x.end(), '#') != 1 || n % 2 == 0 || x[n / 2] != '#') {
                return false;
            }
            return std::equal(x.begin(), x.begin() + n / 2, x.rbegin());
        }
        case Lang::Center:
            return n % 2 == 1 && x[n / 2] == '1';
        case Lang::La:
            return n > 0;
        case Lang::Odd: {
            size_t one = x.find('1');
            if (one == std::string::npos) {
                return false;
            }
            return std::count(x.begin() + one + 1, x.end(), '0') % 2 == 1;
        }
        case Lang::Regular:
            return lang.dfa->accepts(x);
        case Lang::Reversible:
            return lang.rfa->accepts(x);
        case Lang::TwoWayPfa:
            return npfa_optimal_strategy(*lang.npfa, x).value > 0.5;
        case Lang::Union:
            return membership(*lang.left, x) || membership(*lang.right, x);
        case Lang::Empty:
            return false;
        case Lang::Universal:
            return true;
    }
    return false;
}

// ---------------------------------------------------------------------------------------------------------------
// Protocols.

QipSystem eraser_protocol(const Dfa &dfa) {
    dfa.validate();
    SpecBuilder b(HeadModel::OneWay, dfa.alphabet);
    b.state("init", kNon, 1);
    for (const auto &p : dfa.states) {
        b.state("d." + p, kNon, 1);
    }
    b.state("acc", kAcc, 1);
    b.state("rej", kRej, 1);
    b.set_initial("init");
    b.on("init", kLeftEnd, "#", "d." + dfa.states[dfa.start], "init");
    for (size_t p = 0; p < dfa.states.size(); ++p) {
        const std::string name = "d." + dfa.states[p];
        for (size_t s = 0; s < dfa.alphabet.size(); ++s) {
            b.on(name, dfa.alphabet[s], "#", "d." + dfa.states[dfa.next[p][s]], name);
        }
        b.on(name, kRightEnd, "#", dfa.accepting[p] ? "acc" : "rej", name);
    }
    QipSystem s = finish("eraser", b.build());
    s.honest = [](const std::string &) { return std::make_shared<EraserProver>(); };
    s.member = [dfa](const std::string &x) { return dfa.accepts(x); };
    s.structure_modes = {StructureMode::OneWayHalting};
    return s;
}

QipSystem zero_public_protocol() {
    SpecBuilder b(HeadModel::OneWay, "01");
    b.state("q0", kNon, 1);
    b.state("q1", kNon, 1);
    const std::vector<std::string> cells{"#", "q0", "q1"};
    const std::vector<std::string> tag{"#", "0", "1"};
    for (const auto &t : tag) {
        b.state("qacc" + t, kAcc, 1);
    }
    for (const auto &t : tag) {
        b.state("qrej" + t, kRej, 1);
    }
    for (const auto &c : cells) {
        b.cell(c);
    }
    b.set_initial("q0");
    b.on("q0", '^', "#", "q0", "q0");
    for (char s : {'0', '1'}) {
        b.on("q0", s, "q0", "q0", "q0");
        for (int i = 0; i < 3; ++i) {
            b.on("q1", s, cells[i], "qrej" + tag[i], "q0");
        }
        b.on("q0", s, "q1", "qrej1", "#");
    }
    for (int i = 0; i < 3; ++i) {
        b.on("q0", '$', cells[i], "qrej" + tag[i], "#");
        b.on("q1", '$', cells[i], "qacc" + tag[i], "#");
    }
    b.on("q0", '1', "#", "qrej#", "#");
    b.on("q0", '0', "#", "q1", "q1");
    QipSystem s = finish("zero_public", b.build());
    s.is_public = true;
    s.honest = [](const std::string &x) {
        ClassicalTable t;
        t.num_cells = 3;
        int n = static_cast<int>(x.size());
        if (n >= 1) {
            t.set(n, 1, 0, 0, 0);
        }
        return std::make_shared<ClassicalProver>(t);
    };
    s.member = [](const std::string &x) { return membership(language(Lang::Zero), x); };
    s.structure_modes = {StructureMode::Public, StructureMode::OneWayHalting};
    return s;
}

QipSystem la_mo_protocol() {
    SpecBuilder b(HeadModel::MeasureOnce, "a");
    b.state("q0", kNon, 1);
    b.state("q1", kNon, 1);
    b.state("qacc", kAcc, 1);
    b.state("qrej", kRej, 1);
    b.cell("a");
    b.set_initial("q0");
    b.on("q0", '^', "#", "q0", "#");
    b.on("q0", 'a', "#", "q1", "a");
    b.on("q1", 'a', "#", "q1", "#");
    b.on("q0", '$', "a", "qrej", "a");
    b.on("q0", '$', "#", "qrej", "#");
    b.on("q1", '$', "#", "qacc", "#");
    QipSystem s = finish("la_mo", b.build());
    s.measure_once = true;
    s.honest = [](const std::string &) { return std::make_shared<EraserProver>(); };
    s.member = [](const std::string &x) { return membership(language(Lang::La), x); };
    s.structure_modes = {StructureMode::MeasureOnce};
    return s;
}

QipSystem odd_protocol() {
    SpecBuilder b(HeadModel::OneWay, "01");
    for (const char *q : {"q0", "q1", "q2"}) {
        b.state(q, kNon, 1);
    }
    b.state("qacc", kAcc, 1);
    b.state("qrej0", kRej, 1);
    b.state("qrej1", kRej, 1);
    b.cell("a");
    b.set_initial("q0");
    b.on("q0", '^', "#", "q0", "#");
    b.on("q0", '0', "#", "q0", "#");
    b.on("q0", '1', "#", "q1", "a");
    b.on("q0", '$', "#", "qrej0", "#");
    b.on("q1", '0', "#", "q2", "#");
    b.on("q1", '1', "#", "q1", "#");
    b.on("q1", '$', "#", "qrej1", "#");
    b.on("q2", '0', "#", "q1", "#");
    b.on("q2", '1', "#", "q2", "#");
    b.on("q2", '$', "#", "qacc", "#");
    b.on("q1", '0', "a", "qrej0", "#");
    b.on("q1", '1', "a", "qrej0", "#");
    QipSystem s = finish("odd", b.build());
    s.interaction_bounded = true;
    s.honest = [](const std::string &) { return std::make_shared<EraserProver>(); };
    s.member = [](const std::string &x) { return membership(language(Lang::Odd), x); };
    s.structure_modes = {StructureMode::OneWayHalting};
    return s;
}

ProverPtr odd_quantum_prover(cd alpha, cd beta) {
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1) > kUnitaryTol) {
        throw DomainError("reply amplitudes must have unit norm");
    }
    return std::make_shared<FunctionProver>(
        [alpha, beta](int, int cell, const Tape &y, std::vector<ProverOut> &out) {
            if (cell == 0) {
                out.push_back({0, y + '\3', cd{1, 0}});
            } else {
                out.push_back({0, y + '\1', alpha});
                out.push_back({cell, y + '\2', beta});
            }
        },
        "odd-superposed");
}

QipSystem pal_sharp_protocol(int d) {
    if (d < 1) {
        throw DomainError("pal_sharp needs d >= 1");
    }
    SpecBuilder b(HeadModel::TwoWay, "01#");
    b.cell("0");
    b.cell("1");
    std::vector<std::string> stages{""};
    for (size_t i = 0; i < stages.size(); ++i) {
        if (static_cast<int>(stages[i].size()) < d - 1) {
            stages.push_back(stages[i] + "0");
            stages.push_back(stages[i] + "1");
        }
    }
    auto q0 = [](const std::string &s) { return "q0_" + s; };
    auto q0p = [](const std::string &s) { return "q0'_" + s; };
    auto qi = [](int i, const std::string &s) { return "q" + std::to_string(i) + "_" + s; };
    auto ri = [](int i, const std::string &s) { return "r" + std::to_string(i) + "_" + s; };
    b.state(q0(""), kNon, 1);
    b.set_initial(q0(""));
    for (const auto &s : stages) {
        b.state(q0p(s), kNon, 1);
        b.state(qi(1, s), kNon, -1);
        b.state(qi(2, s), kNon, 1);
        for (const std::string &t : {s + "0", s + "1"}) {
            b.state(q0(t), static_cast<int>(t.size()) == d ? kAcc : kNon, t.back() == '0' ? 0 : 1);
        }
        for (int i = 0; i < 3; ++i) {
            b.state(ri(i, s), kRej, 1);
        }
    }
    const double h = 1 / std::sqrt(2.0);
    for (const auto &s : stages) {
        b.on(q0(s), '^', "#", q0p(s), "#");
        b.on(qi(1, s), '^', "#", q0(s + "0"), "#");
        b.on(q0p(s), '$', "#", ri(0, s), "#");
        b.on(qi(2, s), '$', "#", q0(s + "1"), "#");
        b.on(q0p(s), '#', "#", qi(1, s), "#", h);
        b.on(q0p(s), '#', "#", qi(2, s), "#", h);
        for (int i = 1; i <= 2; ++i) {
            for (const char *a : {"0", "1"}) {
                b.on(qi(i, s), '^', a, ri(i, s), a);
                b.on(qi(i, s), '$', a, ri(i, s), a);
            }
            for (const char *g : {"#", "0", "1"}) {
                b.on(qi(i, s), '#', g, ri(i, s), g);
            }
        }
        for (char a : {'0', '1'}) {
            b.on(q0p(s), a, "#", q0p(s), "#");
            for (int i = 1; i <= 2; ++i) {
                for (const char *g : {"#", "0", "1"}) {
                    if (g[0] == a) {
                        b.on(qi(i, s), a, g, qi(i, s), g);
                    } else {
                        b.on(qi(i, s), a, g, ri(i, s), g);
                    }
                }
            }
        }
    }
    QipSystem sys = finish("pal_sharp:d=" + std::to_string(d), b.build());
    sys.completeness = 1;
    sys.soundness = 1 - std::pow(0.5, d);
    sys.honest = [d](const std::string &x) {
        ClassicalTable t;
        t.num_cells = 3;
        auto sep = x.find('#');
        if (sep != std::string::npos) {
            const int m = static_cast<int>(sep);
            auto bit = [&](int i) { return x[i - 1] == '0' ? 1 : 2; };  // u_i as a cell index
            for (int st = 0; st < d; ++st) {
                const int t0 = 1 + st * (2 * m + 3);
                for (int j = 0; j < m; ++j) {
                    int in = j == 0 ? 0 : bit(m - j + 1);
                    t.set(t0 + m + 1 + j, in, 0, bit(m - j), 0);
                }
                if (m > 0) {
                    t.set(t0 + 2 * m + 1, bit(1), 0, 0, 0);
                }
            }
        }
        return std::make_shared<ClassicalProver>(t);
    };
    sys.member = [](const std::string &x) { return membership(language(Lang::PalSharp), x); };
    return sys;
}

QipSystem center_protocol(int n_branches) {
    const int nb = n_branches;
    if (nb < 2) {
        throw DomainError("center needs N >= 2");
    }
    SpecBuilder b(HeadModel::TwoWay, "01");
    b.cell("1");
    b.state("q0", kNon, 1);
    b.state("q1", kNon, 1);
    b.state("q2", kNon, -1);
    b.state("q3", kNon, 1);
    b.set_initial("q0");
    auto w = [](int j, int k) { return "w" + std::to_string(j) + "_" + std::to_string(k); };
    auto r = [](int j) { return "r" + std::to_string(j); };
    auto h = [](int j) { return "h" + std::to_string(j); };
    auto v = [](int j, int k) { return "v" + std::to_string(j) + "_" + std::to_string(k); };
    auto t = [](int l) { return "t" + std::to_string(l); };
    for (int j = 1; j <= nb; ++j) {
        for (int k = 1; k <= 2 * (nb - j); ++k) {
            b.state(w(j, k), kNon, 0);
        }
        b.state(r(j), kNon, 1);
        b.state(h(j), kNon, -1);
        for (int k = 1; k <= j; ++k) {
            b.state(v(j, k), kNon, 0);
        }
    }
    for (int l = 1; l <= nb; ++l) {
        b.state(t(l), l == nb ? kAcc : kRej, 0);
    }
    // Parity check, then back to the left end.
    b.on("q0", '^', "#", "q0", "#");
    for (char c : {'0', '1'}) {
        b.on("q0", c, "#", "q1", "#");
        b.on("q1", c, "#", "q0", "#");
        b.on("q2", c, "#", "q2", "#");
        b.on("q3", c, "#", "q3", "#");
    }
    b.on("q1", '$', "#", "q2", "#");
    b.on("q2", '^', "#", "q3", "#");
    // The prover flags the center; the head must be on a 1.
    const double amp = 1 / std::sqrt(static_cast<double>(nb));
    for (int j = 1; j <= nb; ++j) {
        b.on("q3", '1', "1", j < nb ? w(j, 1) : r(nb), "#", amp);
    }
    // Rightward idling: 2(N - j) extra steps on each cell from the center to the last input cell.
    for (char c : {'0', '1'}) {
        for (int j = 1; j <= nb; ++j) {
            const int len = 2 * (nb - j);
            if (len == 0) {
                b.on(r(j), c, "1", r(j), "1");
                continue;
            }
            b.on(r(j), c, "1", w(j, 1), "1");
            for (int k = 1; k < len; ++k) {
                b.on(w(j, k), c, "1", w(j, k + 1), "1");
            }
            b.on(w(j, len), c, "1", r(j), "1");
        }
    }
    // Leftward idling: j extra steps on each cell down to and including the left endmarker.
    DenseOperator f = qft_matrix(nb);
    for (int j = 1; j <= nb; ++j) {
        b.on(r(j), '$', "1", h(j), "1");
        for (char c : {'0', '1', '^'}) {
            b.on(h(j), c, "1", v(j, 1), "1");
            for (int k = 1; k < j; ++k) {
                b.on(v(j, k), c, "1", v(j, k + 1), "1");
            }
            if (c != '^') {
                b.on(v(j, j), c, "1", h(j), "1");
            }
        }
        for (int l = 1; l <= nb; ++l) {
            b.on(v(j, j), '^', "1", t(l), "#", f(l % nb, j % nb));
        }
    }
    QipSystem s = finish("center:N=" + std::to_string(nb), b.build());
    s.completeness = 1;
    s.soundness = 1 - 1.0 / nb;
    s.honest = [](const std::string &x) {
        ClassicalTable tab;
        tab.num_cells = 2;
        const int n = static_cast<int>(x.size());
        if (n % 2 == 1) {
            const int c = (n + 1) / 2;
            tab.set(2 * n + 2 + c, 0, 0, 1, 0);
            tab.set(2 * n + 3 + c, 0, 0, 1, 0);
        }
        return std::make_shared<ClassicalProver>(tab);
    };
    s.member = [](const std::string &x) { return membership(language(Lang::Center), x); };
    return s;
}

QipSystem upal_protocol(int n_branches) {
    const int nb = n_branches;
    if (nb < 2) {
        throw DomainError("upal needs N >= 2");
    }
    SpecBuilder b(HeadModel::TwoWay, "01");
    b.state("init", kNon, 1);
    b.state("z", kNon, 1);
    b.state("zb", kNon, -1);
    b.state("o", kNon, 1);
    b.state("back", kNon, -1);
    b.state("bz", kNon, -1);
    b.state("acc", kAcc, 1);
    b.set_initial("init");
    auto r = [](int j) { return "r" + std::to_string(j); };
    auto a = [](int j, int k) { return "a" + std::to_string(j) + "_" + std::to_string(k); };
    auto c = [](int j, int k) { return "c" + std::to_string(j) + "_" + std::to_string(k); };
    auto t = [](int l) { return "t" + std::to_string(l); };
    for (int j = 1; j <= nb; ++j) {
        b.state(r(j), kNon, 1);
        for (int k = 1; k <= nb - j; ++k) {
            b.state(a(j, k), kNon, 0);
        }
        for (int k = 1; k <= j; ++k) {
            b.state(c(j, k), kNon, 0);
        }
    }
    for (int l = 1; l <= nb; ++l) {
        b.state(t(l), l == nb ? kAcc : kRej, 0);
    }
    QfaSpec &sp = b.spec();
    auto pub = [&](const std::string &q) {
        int id = sp.state_index(q);
        return sp.is_halting(id) ? std::string(kBlank) : public_cell_name(sp, id, sp.dirs[id]);
    };
    auto go = [&](const std::string &q, char sym, const std::string &q2, cd amp = 1.0) {
        b.on(q, sym, q == "init" ? std::string(kBlank) : pub(q), q2, pub(q2), amp);
    };
    // Shape check for 0*1*; the empty input is accepted on the way back.
    go("init", '^', "z");
    go("z", '0', "z");
    go("z", '1', "zb");
    go("z", '$', "bz");
    go("zb", '0', "o");
    go("zb", '^', "o");
    go("o", '1', "o");
    go("o", '$', "back");
    go("back", '0', "back");
    go("back", '1', "back");
    go("bz", '^', "acc");
    const double amp = 1 / std::sqrt(static_cast<double>(nb));
    for (int j = 1; j <= nb; ++j) {
        go("back", '^', r(j), amp);
    }
    DenseOperator f = qft_matrix(nb);
    for (int j = 1; j <= nb; ++j) {
        const int zeros = nb - j;
        if (zeros == 0) {
            go(r(j), '0', r(j));
        } else {
            go(r(j), '0', a(j, 1));
            for (int k = 1; k < zeros; ++k) {
                go(a(j, k), '0', a(j, k + 1));
            }
            go(a(j, zeros), '0', r(j));
        }
        go(r(j), '1', c(j, 1));
        for (int k = 1; k < j; ++k) {
            go(c(j, k), '1', c(j, k + 1));
        }
        go(c(j, j), '1', r(j));
        for (int l = 1; l <= nb; ++l) {
            go(r(j), '$', t(l), f(l % nb, j % nb));
        }
    }
    QipSystem s = finish("upal:N=" + std::to_string(nb), b.build());
    s.is_public = true;
    s.completeness = 1;
    s.soundness = 1 - 1.0 / nb;
    s.honest = [](const std::string &) { return std::make_shared<IdentityProver>(); };
    s.member = [](const std::string &x) { return membership(language(Lang::Upal), x); };
    s.structure_modes = {StructureMode::Public};
    return s;
}

QipSystem rfa_public_protocol(const Rfa &rfa) {
    rfa.validate();
    SpecBuilder b(HeadModel::OneWay, rfa.alphabet);
    for (size_t p = 0; p < rfa.states.size(); ++p) {
        b.state(rfa.states[p], rfa.kinds[p], 1);
        if (rfa.kinds[p] == kNon && static_cast<int>(p) != rfa.start) {
            b.cell(rfa.states[p]);
        }
    }
    b.set_initial(rfa.states[rfa.start]);
    for (const auto &[key, q] : rfa.step) {
        auto [p, sym] = key;
        const std::string &qn = rfa.states[q];
        const bool halts = rfa.kinds[q] != kNon;
        if (sym == kLeftEnd) {
            if (p == rfa.start) {
                b.on(rfa.states[p], sym, "#", qn, qn);
            }
            continue;
        }
        if (p == rfa.start) {
            continue;
        }
        b.on(rfa.states[p], sym, rfa.states[p], qn, halts ? "#" : qn);
    }
    QipSystem s = finish("rfa", b.build());
    s.is_public = true;
    s.honest = [](const std::string &) { return std::make_shared<IdentityProver>(); };
    s.member = [rfa](const std::string &x) { return rfa.accepts(x); };
    s.structure_modes = {StructureMode::Public, StructureMode::OneWayHalting};
    return s;
}

namespace {

std::string dir_tag(int d) {
    return d > 0 ? "@+1" : "@-1";
}

struct NpfaCellInfo {
    char kind = '#';
    int p = -1;
};

}  // namespace

QipSystem npfa_to_qip(const Npfa &npfa) {
    using K = Npfa::Kind;
    npfa.validate();
    SpecBuilder b(HeadModel::TwoWay, npfa.alphabet);
    const int ns = static_cast<int>(npfa.states.size());
    auto halting = [&](int p) { return npfa.kinds[p] == K::Accept || npfa.kinds[p] == K::Reject; };
    auto st = [&](int p, int d) { return npfa.states[p] + dir_tag(d); };
    auto hat = [&](int p, int d) { return "^" + npfa.states[p] + dir_tag(d); };
    for (int d : {1, -1}) {
        for (int p = 0; p < ns; ++p) {
            StateKind kind = npfa.kinds[p] == K::Accept ? kAcc : npfa.kinds[p] == K::Reject ? kRej : kNon;
            b.state(st(p, d), kind, d);
        }
    }
    b.spec().initial = b.spec().state_index(st(npfa.start, 1));
    for (int d : {1, -1}) {
        for (int p = 0; p < ns; ++p) {
            if (npfa.kinds[p] == K::Choice) {
                b.state(hat(p, d), kNon, 0);
            }
        }
    }
    std::string syms = std::string(1, kLeftEnd) + npfa.alphabet + std::string(1, kRightEnd);
    const double h = 1 / std::sqrt(2.0);
    for (int p = 0; p < ns; ++p) {
        if (halting(p)) {
            continue;
        }
        for (int d : {1, -1}) {
            for (char c : syms) {
                const auto &opts = npfa.options(p, c);
                if (npfa.kinds[p] == K::Coin) {
                    if (opts.size() == 2) {
                        const std::string cell = "c:" + st(p, d);
                        b.on(st(p, d), c, "#", st(opts[0].first, 1), cell, h);
                        b.on(st(p, d), c, "#", st(opts[1].first, 1), cell, h);
                    }
                } else {
                    b.on(st(p, d), c, "#", hat(p, d), "q:" + st(p, d));
                    for (auto [q, d2] : opts) {
                        b.on(hat(p, d), c, "r:" + st(q, d2), st(q, d2), "a:" + st(p, d));
                    }
                }
            }
        }
    }
    QfaSpec partial = b.build();
    QipSystem s = finish("npfa", partial);
    s.completeness = 1;
    s.soundness = 1;
    const QfaSpec &spec = s.verifier;
    std::vector<NpfaCellInfo> info(spec.num_cells());
    std::map<std::pair<int, int>, int> reply_cell;
    for (int g = 1; g < spec.num_cells(); ++g) {
        const std::string &name = spec.cells[g];
        const std::string body = name.substr(2);
        const int d = body.substr(body.size() - 3) == "@+1" ? 1 : -1;
        const std::string pname = body.substr(0, body.size() - 3);
        int p = static_cast<int>(std::find(npfa.states.begin(), npfa.states.end(), pname) - npfa.states.begin());
        info[g] = {name[0], p};
        if (name[0] == 'r') {
            reply_cell[{p, d}] = g;
        }
    }
    s.honest = [npfa, info, reply_cell](const std::string &x) -> ProverPtr {
        auto strat = std::make_shared<NpfaStrategy>(npfa_optimal_strategy(npfa, x));
        const std::string tape = tape_string(x);
        auto reply = [npfa, info, reply_cell, strat, tape](int p, int k) -> std::pair<int, int> {
            int choice = strat->choice[p][k];
            if (choice < 0) {
                return {0, 0};
            }
            auto [q, d] = npfa.options(p, tape[k])[choice];
            return {reply_cell.at({q, d}), d};
        };
        auto decide = [info, reply, w = strat->width](int, int cell, const Tape &history) {
            int k = 0;
            int pending = 0;
            for (char byte : history) {
                const auto &ci = info[static_cast<unsigned char>(byte) - 1];
                if (ci.kind == 'c') {
                    k = (k + 1) % w;
                } else if (ci.kind == 'q') {
                    pending = reply(ci.p, k).second;
                } else if (ci.kind == 'a') {
                    k = ((k + pending) % w + w) % w;
                }
            }
            const auto &ci = info[cell];
            if (ci.kind == 'q') {
                return reply(ci.p, k).first;
            }
            if (ci.kind == 'c' || ci.kind == 'a') {
                return 0;
            }
            return cell;
        };
        return std::make_shared<HistoryProver>(decide, "npfa-honest");
    };
    s.member = [npfa](const std::string &x) { return npfa_optimal_strategy(npfa, x).value > 0.5; };
    return s;
}

QipSystem union_protocol(const QipSystem &sa, const QipSystem &sb) {
    const QfaSpec &pa = sa.source;
    const QfaSpec &pb = sb.source;
    if (pa.input_alphabet != pb.input_alphabet) {
        throw AlphabetError("union needs a common input alphabet");
    }
    QfaSpec u;
    u.head = HeadModel::TwoWay;
    u.input_alphabet = pa.input_alphabet;
    u.add_state("u0", kNon, 1);
    u.add_state("u1", kNon, -1);
    u.initial = 0;
    u.add_cell("1");
    u.add_cell("2");
    std::vector<std::vector<int>> state_map(2);
    std::vector<std::vector<int>> cell_map(2);
    const QfaSpec *parts[2] = {&pa, &pb};
    const char *prefix[2] = {"a.", "b."};
    for (int i = 0; i < 2; ++i) {
        const QfaSpec &p = *parts[i];
        for (int q = 0; q < p.num_states(); ++q) {
            int dir = p.dirs[q];
            if (q == p.initial) {
                if (dir != kNoDir && dir != 1) {
                    throw StructureError("union needs the initial state of each part to move right");
                }
                dir = 1;
            }
            state_map[i].push_back(u.add_state(prefix[i] + p.states[q], p.kinds[q], dir));
        }
        for (int g = 0; g < p.num_cells(); ++g) {
            cell_map[i].push_back(g == 0 ? 0 : u.add_cell(prefix[i] + p.cells[g]));
        }
        const int right = p.num_symbols() - 1;
        for (const auto &[key, moves] : p.delta) {
            auto [q, sym, g] = key;
            for (const Move &m : moves) {
                if (m.completed) {
                    continue;
                }
                if (sym == right && m.to == p.initial && m.cell == 0) {
                    throw StructureError("part re-enters its initial configuration on the right endmarker");
                }
                Move m2 = m;
                m2.to = state_map[i][m.to];
                m2.cell = cell_map[i][m.cell];
                u.add_move(state_map[i][q], sym, cell_map[i][g], m2);
            }
        }
    }
    const int right = u.num_symbols() - 1;
    u.add_move(0, 0, 0, Move{1, 0, -1, cd{1, 0}, false});
    for (int i = 0; i < 2; ++i) {
        u.add_move(1, right, 1 + i, Move{state_map[i][parts[i]->initial], 0, 1, cd{1, 0}, false});
    }
    QipSystem s = finish("union(" + sa.name + "," + sb.name + ")", u);
    s.completeness = std::min(sa.completeness, sb.completeness);
    s.soundness = std::min(sa.soundness, sb.soundness);
    s.classical_honest = sa.classical_honest && sb.classical_honest;
    const int nc = s.verifier.num_cells();
    std::vector<std::vector<int>> to_sub(2, std::vector<int>(nc, -1));
    for (int i = 0; i < 2; ++i) {
        for (size_t g = 0; g < cell_map[i].size(); ++g) {
            to_sub[i][cell_map[i][g]] = static_cast<int>(g);
        }
    }
    auto ma = sa.member;
    auto mb = sb.member;
    auto ha = sa.honest;
    auto hb = sb.honest;
    s.member = [ma, mb](const std::string &x) { return ma(x) || mb(x); };
    s.honest = [ma, mb, ha, hb, to_sub, cell_map](const std::string &x) -> ProverPtr {
        const int pick = ma(x) ? 0 : (mb(x) ? 1 : 0);
        ProverPtr sub = pick == 0 ? (ha ? ha(x) : std::make_shared<IdentityProver>())
                                  : (hb ? hb(x) : std::make_shared<IdentityProver>());
        return std::make_shared<FunctionProver>(
            [pick, sub, to_sub, cell_map](int round, int cell, const Tape &y, std::vector<ProverOut> &out) {
                const int flag = 1 + pick;
                if (round == 1) {
                    int c2 = cell == 0 ? flag : (cell == flag ? 0 : cell);
                    out.push_back({c2, y, cd{1, 0}});
                    return;
                }
                if (round == 2 || to_sub[pick][cell] < 0) {
                    out.push_back({cell, y, cd{1, 0}});
                    return;
                }
                size_t start = out.size();
                sub->apply(round - 2, to_sub[pick][cell], y, out);
                for (size_t i = start; i < out.size(); ++i) {
                    out[i].cell = cell_map[pick][out[i].cell];
                }
            },
            "union-honest");
    };
    return s;
}

// ---------------------------------------------------------------------------------------------------------------
// Registry.

namespace {

std::map<std::string, std::string> parse_params(const std::string &text) {
    std::map<std::string, std::string> out;
    if (text.empty()) {
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            out["m"] = item;
        } else {
            out[item.substr(0, eq)] = item.substr(eq + 1);
        }
    }
    return out;
}

int int_param(const std::map<std::string, std::string> &p, const std::string &key, int fallback) {
    auto it = p.find(key);
    if (it == p.end()) {
        return fallback;
    }
    try {
        size_t pos = 0;
        int v = std::stoi(it->second, &pos);
        if (pos != it->second.size()) {
            throw ParseError("bad value for " + key);
        }
        return v;
    } catch (const std::logic_error &) {
        throw ParseError("bad value for " + key + ": " + it->second);
    }
}

std::string str_param(const std::map<std::string, std::string> &p, const std::string &key,
                      const std::string &fallback) {
    auto it = p.find(key);
    if (it != p.end()) {
        return it->second;
    }
    it = p.find("m");
    return it != p.end() ? it->second : fallback;
}

}  // namespace

QipSystem builtin_system(const std::string &spec) {
    auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const auto params = parse_params(colon == std::string::npos ? "" : spec.substr(colon + 1));
    QipSystem s;
    if (name == "zero_public") {
        s = zero_public_protocol();
    } else if (name == "la_mo") {
        s = la_mo_protocol();
    } else if (name == "odd") {
        s = odd_protocol();
    } else if (name == "pal_sharp") {
        s = pal_sharp_protocol(int_param(params, "d", 2));
    } else if (name == "center") {
        s = center_protocol(int_param(params, "N", 2));
    } else if (name == "upal") {
        s = upal_protocol(int_param(params, "N", 4));
    } else if (name == "eraser") {
        s = eraser_protocol(builtin_dfa(str_param(params, "dfa", "zero")));
    } else if (name == "rfa") {
        s = rfa_public_protocol(builtin_rfa(str_param(params, "rfa", "even")));
    } else if (name == "npfa") {
        s = npfa_to_qip(builtin_npfa(str_param(params, "npfa", "det")));
    } else if (name == "union") {
        auto a = params.count("a") ? params.at("a") : "zero";
        auto b = params.count("b") ? params.at("b") : "ends1";
        s = union_protocol(eraser_protocol(builtin_dfa(a)), eraser_protocol(builtin_dfa(b)));
    } else {
        throw ParseError("unknown protocol: " + spec);
    }
    s.name = spec;
    return s;
}

std::vector<std::string> builtin_system_names() {
    return {"zero_public", "la_mo",       "odd",        "pal_sharp:d=2", "center:N=2",
            "upal:N=4",    "eraser:dfa=zero", "rfa:even", "npfa:det",      "union:a=zero,b=ends1"};
}

}  // namespace qip
