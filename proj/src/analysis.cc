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

#include "qip/analysis.h"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <set>

#include "qip/errors.h"

namespace qip {

std::vector<std::string> strings_up_to(const std::string &alphabet, int n) {
    if (n < 0) {
        throw DomainError("length bound must be nonnegative");
    }
    std::vector<std::string> out{""};
    std::vector<std::string> layer{""};
    for (int len = 1; len <= n; ++len) {
        std::vector<std::string> next;
        for (const auto &s : layer) {
            for (char ch : alphabet) {
                next.push_back(s + ch);
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        layer.swap(next);
    }
    return out;
}

TilingInstance tiling_instance(const LanguageId &lang, int n, int max_strings) {
    const std::string alpha = lang.alphabet();
    double count = 0;
    double p = 1;
    for (int i = 0; i <= n; ++i, p *= std::max<size_t>(alpha.size(), 1)) {
        count += p;
    }
    if (count > max_strings || max_strings > 64) {
        throw CapacityError("tiling matrix needs " + std::to_string(static_cast<int64_t>(count)) +
                            " strings, cap is " + std::to_string(std::min(max_strings, 64)));
    }
    TilingInstance inst;
    inst.n = n;
    inst.index = strings_up_to(alpha, n);
    const size_t m = inst.index.size();
    inst.matrix.assign(m, std::vector<uint8_t>(m, 0));
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < m; ++j) {
            inst.matrix[i][j] = membership(lang, inst.index[i] + inst.index[j]) ? 1 : 0;
        }
    }
    return inst;
}

bool verify_tiling(const TilingInstance &inst, const Tiling &tiling) {
    const size_t m = inst.index.size();
    std::vector<std::vector<uint8_t>> covered(m, std::vector<uint8_t>(m, 0));
    for (const auto &t : tiling.tiles) {
        if (t.rows.empty() || t.cols.empty()) {
            return false;
        }
        for (int r : t.rows) {
            for (int c : t.cols) {
                if (r < 0 || c < 0 || static_cast<size_t>(r) >= m || static_cast<size_t>(c) >= m ||
                    !inst.matrix[r][c]) {
                    return false;
                }
                covered[r][c] = 1;
            }
        }
    }
    for (size_t r = 0; r < m; ++r) {
        for (size_t c = 0; c < m; ++c) {
            if (inst.matrix[r][c] && !covered[r][c]) {
                return false;
            }
        }
    }
    return true;
}

namespace {

constexpr size_t kMaxRectangles = 200000;
constexpr int64_t kMaxCoverNodes = 50000000;

struct Cover {
    size_t words = 0;
    std::vector<std::vector<uint64_t>> tiles;
    std::vector<std::vector<int>> by_cell;
    std::vector<int> chosen;
    int64_t nodes = 0;

    bool search(std::vector<uint64_t> &uncovered, int budget) {
        if (++nodes > kMaxCoverNodes) {
            throw CapacityError("set cover search exceeded its node cap");
        }
        int cell = -1;
        size_t fewest = SIZE_MAX;
        for (size_t w = 0; w < words; ++w) {
            uint64_t bits = uncovered[w];
            while (bits) {
                int b = __builtin_ctzll(bits);
                bits &= bits - 1;
                int id = static_cast<int>(w * 64 + b);
                if (by_cell[id].size() < fewest) {
                    fewest = by_cell[id].size();
                    cell = id;
                }
            }
        }
        if (cell < 0) {
            return true;
        }
        if (budget == 0) {
            return false;
        }
        for (int t : by_cell[cell]) {
            std::vector<uint64_t> next(uncovered);
            for (size_t w = 0; w < words; ++w) {
                next[w] &= ~tiles[t][w];
            }
            chosen.push_back(t);
            if (search(next, budget - 1)) {
                return true;
            }
            chosen.pop_back();
        }
        return false;
    }
};

}  // namespace

Tiling minimum_tiling(const TilingInstance &inst) {
    const size_t m = inst.index.size();
    if (m > 64) {
        throw CapacityError("tiling matrix wider than 64 strings");
    }
    std::vector<uint64_t> rows(m, 0);
    for (size_t r = 0; r < m; ++r) {
        for (size_t c = 0; c < m; ++c) {
            if (inst.matrix[r][c]) {
                rows[r] |= uint64_t{1} << c;
            }
        }
    }
    // Column sets of maximal rectangles are the intersections of nonempty row families.
    std::set<uint64_t> closed;
    std::vector<uint64_t> frontier;
    for (uint64_t row : rows) {
        if (row && closed.insert(row).second) {
            frontier.push_back(row);
        }
    }
    while (!frontier.empty()) {
        uint64_t s = frontier.back();
        frontier.pop_back();
        for (uint64_t row : rows) {
            uint64_t t = s & row;
            if (t && closed.insert(t).second) {
                if (closed.size() > kMaxRectangles) {
                    throw CapacityError("too many maximal rectangles");
                }
                frontier.push_back(t);
            }
        }
    }
    std::vector<Tile> rects;
    Cover cover;
    cover.words = (m * m + 63) / 64;
    cover.by_cell.assign(m * m, {});
    for (uint64_t cols : closed) {
        Tile t;
        std::vector<uint64_t> cells(cover.words, 0);
        for (size_t r = 0; r < m; ++r) {
            if ((rows[r] & cols) == cols) {
                t.rows.push_back(static_cast<int>(r));
            }
        }
        for (size_t c = 0; c < m; ++c) {
            if (cols >> c & 1) {
                t.cols.push_back(static_cast<int>(c));
            }
        }
        for (int r : t.rows) {
            for (int c : t.cols) {
                size_t id = static_cast<size_t>(r) * m + c;
                cells[id / 64] |= uint64_t{1} << (id % 64);
                cover.by_cell[id].push_back(static_cast<int>(rects.size()));
            }
        }
        rects.push_back(std::move(t));
        cover.tiles.push_back(std::move(cells));
    }
    std::vector<uint64_t> all(cover.words, 0);
    for (size_t r = 0; r < m; ++r) {
        for (size_t c = 0; c < m; ++c) {
            if (inst.matrix[r][c]) {
                size_t id = r * m + c;
                all[id / 64] |= uint64_t{1} << (id % 64);
            }
        }
    }

    // Greedy cover gives the upper end of the deepening loop.
    int greedy = 0;
    {
        std::vector<uint64_t> left(all);
        while (std::any_of(left.begin(), left.end(), [](uint64_t w) { return w != 0; })) {
            int best = -1;
            int gain = 0;
            for (size_t t = 0; t < cover.tiles.size(); ++t) {
                int g = 0;
                for (size_t w = 0; w < cover.words; ++w) {
                    g += __builtin_popcountll(left[w] & cover.tiles[t][w]);
                }
                if (g > gain) {
                    gain = g;
                    best = static_cast<int>(t);
                }
            }
            for (size_t w = 0; w < cover.words; ++w) {
                left[w] &= ~cover.tiles[best][w];
            }
            ++greedy;
        }
    }

    Tiling out;
    for (int k = 0; k <= greedy; ++k) {
        std::vector<uint64_t> left(all);
        cover.chosen.clear();
        if (cover.search(left, k)) {
            for (int t : cover.chosen) {
                out.tiles.push_back(rects[t]);
            }
            break;
        }
    }
    if (!verify_tiling(inst, out)) {
        throw ContractError("internal error: tiling failed verification");
    }
    return out;
}

int tiling_complexity(const LanguageId &lang, int n, int max_strings) {
    return static_cast<int>(minimum_tiling(tiling_instance(lang, n, max_strings)).tiles.size());
}

boost::multiprecision::cpp_int tiling_bound(int64_t q, int64_t g, int64_t dlt, int64_t c, double eps) {
    using boost::multiprecision::cpp_int;
    using Real = boost::multiprecision::cpp_bin_float_100;
    if (q < 1 || g < 1 || dlt < 1 || c < 1) {
        throw DomainError("tiling bound needs positive counts");
    }
    if (!(eps >= 0 && eps < 0.5)) {
        throw DomainError("error bound must lie in [0, 1/2)");
    }
    cpp_int d = cpp_int(q) * g * boost::multiprecision::pow(cpp_int(dlt), static_cast<unsigned>(c));
    if (d > 100000) {
        throw CapacityError("tiling bound exponent too large");
    }
    const unsigned du = d.convert_to<unsigned>();
    Real num = 2 * boost::multiprecision::sqrt(Real(2)) * (1 + 2 * Real(d) * Real(d));
    Real base = boost::multiprecision::ceil(num / (1 - 2 * Real(eps)));
    cpp_int b = base.convert_to<cpp_int>();
    return boost::multiprecision::pow(cpp_int(4), du) * boost::multiprecision::pow(b, 2 * du + 1);
}

std::vector<SweepRow> sweep(const QipSystem &system, int n_max, int64_t t_max, const AdversaryBudget &budget,
                            bool with_adversary, bool quantum, int64_t max_rows) {
    const std::string &alpha = system.verifier.input_alphabet;
    double count = 0;
    double p = 1;
    for (int i = 0; i <= n_max; ++i, p *= std::max<size_t>(alpha.size(), 1)) {
        count += p;
    }
    if (n_max < 0 || count > static_cast<double>(max_rows)) {
        throw CapacityError("sweep would produce " + std::to_string(static_cast<int64_t>(count)) +
                            " rows, cap is " + std::to_string(max_rows));
    }
    std::vector<SweepRow> out;
    for (const auto &x : strings_up_to(alpha, n_max)) {
        SweepRow row;
        row.x = x;
        row.member = system.member(x);
        row.honest_p_acc = run(system, *system.honest_prover(x), x, t_max).p_acc;
        if (with_adversary) {
            AdversaryBudget b = budget;
            b.t_max = t_max;
            SuiteResult s = adversary_suite(system, x, b, quantum);
            row.adversary_p_acc = s.max_p_acc;
            row.adversary_best = s.best;
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace qip
