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

#include "qip/prover.h"

#include <fstream>
#include <set>
#include <sstream>

#include "qip/errors.h"

namespace qip {

void strip_tape(Tape &t) {
    while (!t.empty() && t.back() == 0) {
        t.pop_back();
    }
}

void IdentityProver::apply(int, int cell, const Tape &tape, std::vector<ProverOut> &out) const {
    out.push_back({cell, tape, cd{1, 0}});
}

std::string IdentityProver::describe() const {
    return "identity";
}

ClassicalProver::ClassicalProver(ClassicalTable table) : table_(std::move(table)) {
    const int nc = table_.num_cells;
    const int mm = table_.memory_states;
    if (nc < 1 || mm < 1 || mm > 255) {
        throw DomainError("classical prover needs 1..255 memory states and at least one cell symbol");
    }
    if (table_.allow_recording && 1 + nc * mm > 255) {
        throw CapacityError("history symbols do not fit in a tape byte");
    }
    for (int i = 0; i < nc * mm; ++i) {
        identity_.push_back({i / mm, i % mm});
    }
    std::map<int, std::vector<std::pair<int, std::pair<int, int>>>> by_round;
    for (const auto &[key, val] : table_.entries) {
        auto [r, g, m] = key;
        if (r < 1) {
            throw DomainError("classical prover rounds start at 1");
        }
        if (g < 0 || g >= nc || m < 0 || m >= mm || val.first < 0 || val.first >= nc || val.second < 0 ||
            val.second >= mm) {
            throw DomainError("classical prover entry out of range at round " + std::to_string(r));
        }
        by_round[r].push_back({g * mm + m, val});
        last_round_ = std::max(last_round_, r);
    }
    for (const auto &[r, list] : by_round) {
        std::vector<std::pair<int, int>> map(nc * mm, {-1, -1});
        std::map<int, int> hit;
        bool injective = true;
        std::string collision;
        for (const auto &[idx, val] : list) {
            map[idx] = val;
            int o = val.first * mm + val.second;
            auto [it, fresh] = hit.try_emplace(o, idx);
            if (!fresh && injective) {
                injective = false;
                collision = "round " + std::to_string(r) + ": inputs (" + std::to_string(it->second / mm) + "," +
                            std::to_string(it->second % mm) + ") and (" + std::to_string(idx / mm) + "," +
                            std::to_string(idx % mm) + ") share an image";
            }
        }
        if (!injective) {
            if (!table_.allow_recording) {
                throw ReversibilityError(collision);
            }
            for (int i = 0; i < nc * mm; ++i) {
                if (map[i].first < 0) {
                    map[i] = identity_[i];
                }
            }
            recording_[r] = true;
        } else {
            int cursor = 0;
            for (int i = 0; i < nc * mm; ++i) {
                if (map[i].first >= 0) {
                    continue;
                }
                while (hit.count(cursor)) {
                    ++cursor;
                }
                map[i] = {cursor / mm, cursor % mm};
                hit[cursor] = i;
            }
            recording_[r] = false;
        }
        maps_[r] = std::move(map);
    }
}

const std::vector<std::pair<int, int>> &ClassicalProver::round_map(int round) const {
    auto it = maps_.find(round);
    return it == maps_.end() ? identity_ : it->second;
}

bool ClassicalProver::records(int round) const {
    auto it = recording_.find(round);
    return it != recording_.end() && it->second;
}

void ClassicalProver::apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const {
    const int mm = table_.memory_states;
    if (cell < 0 || cell >= table_.num_cells) {
        throw AlphabetError("classical prover received an unknown cell symbol");
    }
    int m = tape.empty() ? 0 : static_cast<unsigned char>(tape[0]);
    if (m >= mm) {
        throw ContractError("classical prover tape holds an invalid memory state");
    }
    auto [g2, m2] = round_map(round)[cell * mm + m];
    Tape t = tape;
    if (t.empty()) {
        t.push_back(0);
    }
    t[0] = static_cast<char>(m2);
    if (records(round)) {
        t.push_back(static_cast<char>(1 + cell * mm + m));
    }
    strip_tape(t);
    out.push_back({g2, std::move(t), cd{1, 0}});
}

std::string ClassicalProver::describe() const {
    std::ostringstream s;
    s << "classical memory=" << table_.memory_states;
    if (table_.allow_recording) {
        s << " record";
    }
    for (const auto &[key, val] : table_.entries) {
        auto [r, g, m] = key;
        s << " " << r << ":" << g << "," << m << "->" << val.first << "," << val.second;
    }
    return s.str();
}

void EraserProver::apply(int, int cell, const Tape &tape, std::vector<ProverOut> &out) const {
    if (cell > 254) {
        throw CapacityError("cell symbol does not fit in a tape byte");
    }
    Tape t = tape;
    t.push_back(static_cast<char>(1 + cell));
    out.push_back({0, std::move(t), cd{1, 0}});
}

std::string EraserProver::describe() const {
    return "eraser";
}

HistoryProver::HistoryProver(Decide decide, std::string label) : decide_(std::move(decide)), label_(std::move(label)) {
}

void HistoryProver::apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const {
    if (cell > 254) {
        throw CapacityError("cell symbol does not fit in a tape byte");
    }
    int reply = decide_(round, cell, tape);
    Tape t = tape;
    t.push_back(static_cast<char>(1 + cell));
    out.push_back({reply, std::move(t), cd{1, 0}});
}

std::string HistoryProver::describe() const {
    return label_;
}

FunctionProver::FunctionProver(Fn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {
}

void FunctionProver::apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const {
    fn_(round, cell, tape, out);
}

std::string FunctionProver::describe() const {
    return label_;
}

DenseProver::DenseProver(int num_cells, int tape_alphabet, int c, std::vector<DenseOperator> rounds)
    : nc_(num_cells), dlt_(tape_alphabet), c_(c), rounds_(std::move(rounds)) {
    if (nc_ < 1 || dlt_ < 1 || c_ < 0) {
        throw DomainError("dense prover needs positive alphabet sizes");
    }
    int64_t dim = nc_;
    for (int j = 0; j < c_; ++j) {
        dim *= dlt_;
        if (dim > (1 << 16)) {
            throw CapacityError("dense prover dimension too large");
        }
    }
    dim_ = static_cast<int>(dim);
    for (const auto &u : rounds_) {
        if (u.rows() != dim_ || u.cols() != dim_) {
            throw DimensionError("dense prover round has dimension " + std::to_string(u.rows()) + ", expected " +
                                 std::to_string(dim_));
        }
    }
}

int64_t DenseProver::encode(int cell, const Tape &tape) const {
    if (static_cast<int>(tape.size()) > c_) {
        throw ContractError("tape content exceeds the dense prover bound");
    }
    int64_t idx = cell;
    for (int j = 0; j < c_; ++j) {
        int s = j < static_cast<int>(tape.size()) ? static_cast<unsigned char>(tape[j]) : 0;
        if (s >= dlt_) {
            throw ContractError("tape symbol outside the dense prover alphabet");
        }
        idx = idx * dlt_ + s;
    }
    return idx;
}

void DenseProver::decode(int64_t index, int &cell, Tape &tape) const {
    tape.assign(c_, 0);
    for (int j = c_ - 1; j >= 0; --j) {
        tape[j] = static_cast<char>(index % dlt_);
        index /= dlt_;
    }
    cell = static_cast<int>(index);
    strip_tape(tape);
}

void DenseProver::apply(int round, int cell, const Tape &tape, std::vector<ProverOut> &out) const {
    if (round < 1 || round > static_cast<int>(rounds_.size())) {
        out.push_back({cell, tape, cd{1, 0}});
        return;
    }
    const auto &u = rounds_[round - 1];
    int64_t col = encode(cell, tape);
    for (int64_t row = 0; row < dim_; ++row) {
        cd a = u(row, col);
        if (std::abs(a) > 1e-15) {
            ProverOut o{0, {}, a};
            decode(row, o.cell, o.tape);
            out.push_back(std::move(o));
        }
    }
}

std::string DenseProver::describe() const {
    std::ostringstream s;
    s << "dense cells=" << nc_ << " tape_alphabet=" << dlt_ << " c=" << c_ << " rounds=" << rounds_.size();
    return s.str();
}

std::shared_ptr<DenseProver> densify(const ClassicalProver &p) {
    const auto &t = p.table();
    const int nc = t.num_cells;
    const int mm = t.memory_states;
    std::vector<DenseOperator> rounds;
    for (int r = 1; r <= p.last_round(); ++r) {
        if (p.records(r)) {
            throw ContractError("a recording classical prover has no bounded-tape form");
        }
        DenseOperator u = DenseOperator::Zero(nc * mm, nc * mm);
        const auto &map = p.round_map(r);
        for (int i = 0; i < nc * mm; ++i) {
            u(map[i].first * mm + map[i].second, i) = 1;
        }
        rounds.push_back(u);
    }
    return std::make_shared<DenseProver>(nc, mm, 1, std::move(rounds));
}

bool check_committed(const ProverStrategy &p, int num_cells, int i_max, size_t max_tapes) {
    std::set<Tape> reach{Tape{}};
    std::vector<ProverOut> out;
    for (int i = 1; i <= i_max; ++i) {
        std::set<Tape> next;
        for (const Tape &y : reach) {
            for (int g = 0; g < num_cells; ++g) {
                out.clear();
                p.apply(i, g, y, out);
                for (const auto &o : out) {
                    if (std::abs(o.amp) <= 1e-9) {
                        continue;
                    }
                    if (g == 0 && o.cell != 0) {
                        return false;
                    }
                    next.insert(o.tape);
                }
            }
        }
        if (next.size() > max_tapes) {
            throw CapacityError("reachable prover tapes exceed " + std::to_string(max_tapes));
        }
        reach.swap(next);
    }
    return true;
}

double reachable_unitarity_defect(const ProverStrategy &p, int round,
                                  const std::vector<std::pair<int, Tape>> &basis) {
    std::vector<std::map<std::pair<int, Tape>, cd>> images;
    std::vector<ProverOut> out;
    for (const auto &[g, y] : basis) {
        out.clear();
        p.apply(round, g, y, out);
        std::map<std::pair<int, Tape>, cd> img;
        for (const auto &o : out) {
            img[{o.cell, o.tape}] += o.amp;
        }
        images.push_back(std::move(img));
    }
    double worst = 0;
    for (size_t a = 0; a < images.size(); ++a) {
        for (size_t b = a; b < images.size(); ++b) {
            cd ip = 0;
            for (const auto &[k, v] : images[a]) {
                auto it = images[b].find(k);
                if (it != images[b].end()) {
                    ip += std::conj(v) * it->second;
                }
            }
            double want = a == b ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(ip - want));
        }
    }
    return worst;
}

namespace {

int parse_int_field(const std::string &s, const std::string &where) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) {
            throw ParseError(where + "bad integer " + s);
        }
        return v;
    } catch (const std::logic_error &) {
        throw ParseError(where + "bad integer " + s);
    }
}

}  // namespace

ProverPtr parse_prover(const std::string &text, const QfaSpec &spec) {
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    std::string kind;
    ClassicalTable table;
    table.num_cells = spec.num_cells();
    while (std::getline(ss, line)) {
        ++lineno;
        std::stringstream ls(line);
        std::vector<std::string> tok;
        std::string w;
        while (ls >> w) {
            tok.push_back(w);
        }
        if (tok.empty() || tok[0].rfind("//", 0) == 0) {
            continue;
        }
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (tok[0] == "prover") {
            if (tok.size() != 2 || !kind.empty()) {
                throw ParseError(where + "expected a single 'prover identity|classical' line");
            }
            kind = tok[1];
            if (kind != "identity" && kind != "classical") {
                throw ParseError(where + "unknown prover kind " + kind);
            }
        } else if (tok[0] == "memory" && tok.size() == 2) {
            table.memory_states = parse_int_field(tok[1], where);
        } else if (tok[0] == "record" && tok.size() == 1) {
            table.allow_recording = true;
        } else if (tok[0] == "entry") {
            if (tok.size() != 7 || tok[4] != ":") {
                throw ParseError(where + "entry must read: entry ROUND CELL MEM : CELL2 MEM2");
            }
            int g = spec.find_cell(tok[2]);
            int g2 = spec.find_cell(tok[5]);
            if (g < 0 || g2 < 0) {
                throw ParseError(where + "unknown cell symbol");
            }
            table.set(parse_int_field(tok[1], where), g, parse_int_field(tok[3], where), g2,
                      parse_int_field(tok[6], where));
        } else {
            throw ParseError(where + "unexpected line");
        }
    }
    if (kind.empty()) {
        throw ParseError("missing prover line");
    }
    if (kind == "identity") {
        return std::make_shared<IdentityProver>();
    }
    return std::make_shared<ClassicalProver>(table);
}

ProverPtr load_prover_file(const std::string &path, const QfaSpec &spec) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_prover(buf.str(), spec);
}

std::string serialize_classical(const ClassicalTable &t, const QfaSpec &spec) {
    std::ostringstream s;
    s << "prover classical\nmemory " << t.memory_states << "\n";
    if (t.allow_recording) {
        s << "record\n";
    }
    for (const auto &[key, val] : t.entries) {
        auto [r, g, m] = key;
        s << "entry " << r << " " << spec.cells.at(g) << " " << m << " : " << spec.cells.at(val.first) << " "
          << val.second << "\n";
    }
    return s.str();
}

}  // namespace qip
