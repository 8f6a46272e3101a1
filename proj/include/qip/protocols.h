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

#ifndef QIP_PROTOCOLS_H
#define QIP_PROTOCOLS_H

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qip/runtime.h"

namespace qip {

/// Complete deterministic automaton over a one-character-per-symbol alphabet.
struct Dfa {
    std::string alphabet;
    std::vector<std::string> states;
    int start = 0;
    std::vector<bool> accepting;
    /// next[state][symbol index in alphabet]
    std::vector<std::vector<int>> next;

    void validate() const;
    bool accepts(const std::string &x) const;
};

/// Names: zero (strings ending in 0), ends1 (strings ending in 1), even_ones (even number of 1s).
Dfa builtin_dfa(const std::string &name);

/// One-way reversible automaton. step maps (state, symbol) to a state, with '^' and '$' as endmarkers.
struct Rfa {
    std::string alphabet;
    std::vector<std::string> states;
    std::vector<StateKind> kinds;
    int start = 0;
    std::map<std::pair<int, char>, int> step;

    void validate() const;
    bool accepts(const std::string &x) const;
};

/// Names: even (even-length strings over {a}), all (every string over {a}).
Rfa builtin_rfa(const std::string &name);

/// Two-way automaton mixing fair coins and nondeterministic choices.
struct Npfa {
    enum class Kind { Coin, Choice, Accept, Reject };
    std::string alphabet;
    std::vector<std::string> states;
    std::vector<Kind> kinds;
    int start = 0;
    /// Options (target, head move) for (state, tape symbol). A coin lists exactly its two outcomes.
    std::map<std::pair<int, char>, std::vector<std::pair<int, int>>> moves;

    void validate() const;
    const std::vector<std::pair<int, int>> &options(int p, char sym) const;
};

/// Names: det (accepts exactly "a"), coin (one fair coin, accept on heads), choice (strings over {a,b} containing
/// an a, found by guessing).
Npfa builtin_npfa(const std::string &name);

/// Stationary choice per (state, head position) for a fixed input; -1 where no choice is made.
struct NpfaStrategy {
    int width = 0;
    std::vector<std::vector<int>> choice;
    double value = 0;
};

/// Optimal stationary strategy by value iteration from below; ties go to the option whose value settled first.
NpfaStrategy npfa_optimal_strategy(const Npfa &m, const std::string &x);

enum class Lang { Zero, Upal, PalSharp, Center, La, Odd, Regular, Reversible, TwoWayPfa, Union, Empty, Universal };

struct LanguageId {
    Lang kind = Lang::Zero;
    std::string alphabet_override;
    std::shared_ptr<const Dfa> dfa;
    std::shared_ptr<const Rfa> rfa;
    std::shared_ptr<const Npfa> npfa;
    std::shared_ptr<const LanguageId> left;
    std::shared_ptr<const LanguageId> right;

    std::string alphabet() const;
};

LanguageId language(Lang kind);
/// Names: zero, upal, pal_sharp, center, la, odd, empty, universal, dfa:NAME.
LanguageId parse_language(const std::string &name);
bool membership(const LanguageId &lang, const std::string &x);

QipSystem eraser_protocol(const Dfa &dfa);
QipSystem pal_sharp_protocol(int d);
QipSystem center_protocol(int n_branches);
QipSystem upal_protocol(int n_branches);
QipSystem zero_public_protocol();
QipSystem la_mo_protocol();
QipSystem odd_protocol();
QipSystem rfa_public_protocol(const Rfa &rfa);
QipSystem npfa_to_qip(const Npfa &npfa);
QipSystem union_protocol(const QipSystem &a, const QipSystem &b);

/// Built-in systems by name with optional parameters, e.g. "pal_sharp:d=2", "center:N=2", "eraser:dfa=zero",
/// "rfa:even", "npfa:coin", "union:a=zero,b=ends1".
QipSystem builtin_system(const std::string &spec);
std::vector<std::string> builtin_system_names();

/// Odd-protocol committed prover that answers a query with amplitude alpha for the blank and beta for returning a.
ProverPtr odd_quantum_prover(cd alpha, cd beta);

}  // namespace qip

#endif
