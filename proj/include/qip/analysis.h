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

#ifndef QIP_ANALYSIS_H
#define QIP_ANALYSIS_H

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "qip/adversary.h"
#include "qip/protocols.h"

namespace qip {

/// All strings over alphabet of length at most n, shorter first, then lexicographic in alphabet order.
std::vector<std::string> strings_up_to(const std::string &alphabet, int n);

/// Membership matrix: entry (i, j) is 1 iff index[i] + index[j] is in the language.
struct TilingInstance {
    int n = 0;
    std::vector<std::string> index;
    std::vector<std::vector<uint8_t>> matrix;
};

struct Tile {
    std::vector<int> rows;
    std::vector<int> cols;
};

struct Tiling {
    std::vector<Tile> tiles;
};

constexpr int kDefaultTilingStrings = 64;

TilingInstance tiling_instance(const LanguageId &lang, int n, int max_strings = kDefaultTilingStrings);

/// True when every tile is all-ones and the tiles cover every 1-entry.
bool verify_tiling(const TilingInstance &inst, const Tiling &tiling);

/// Smallest cover of the 1-entries by all-ones rectangles. Throws CapacityError on oversized search spaces.
Tiling minimum_tiling(const TilingInstance &inst);

int tiling_complexity(const LanguageId &lang, int n, int max_strings = kDefaultTilingStrings);

/// 4^d * ceil(2 sqrt(2) (1 + 2 d^2) / (1 - 2 eps))^(2d + 1) with d = q * g * dlt^c.
boost::multiprecision::cpp_int tiling_bound(int64_t q, int64_t g, int64_t dlt, int64_t c, double eps);

struct SweepRow {
    std::string x;
    bool member = false;
    double honest_p_acc = 0;
    double adversary_p_acc = 0;
    std::string adversary_best;
};

/// One row per input of length at most n_max. Set with_adversary to false to skip the adversary column.
std::vector<SweepRow> sweep(const QipSystem &system, int n_max, int64_t t_max, const AdversaryBudget &budget,
                            bool with_adversary = true, bool quantum = false, int64_t max_rows = 4096);

}  // namespace qip

#endif
