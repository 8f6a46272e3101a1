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

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "qip/adversary.h"
#include "qip/analysis.h"
#include "qip/errors.h"
#include "qip/protocols.h"
#include "qip/qfa.h"
#include "qip/runtime.h"

namespace {

using json = nlohmann::ordered_json;
using namespace qip;

constexpr const char *kVersion = "0.1.0";

/// Exit 1: the request was understood but failed. Exit 2: the request itself was malformed.
struct UsageFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<int> parse_lengths(const std::string &text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto dots = part.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(std::stoi(part));
            } else {
                int lo = std::stoi(part.substr(0, dots));
                int hi = std::stoi(part.substr(dots + 2));
                for (int i = lo; i <= hi; ++i) {
                    out.push_back(i);
                }
            }
        } catch (const std::logic_error &) {
            throw UsageFailure("bad length list: " + text);
        }
    }
    return out;
}

QipSystem load_system(const std::string &name) {
    if (std::filesystem::is_regular_file(name)) {
        QfaSpec partial = load_spec_file(name);
        QipSystem s;
        s.name = name;
        s.source = partial;
        s.verifier = validate_and_complete(partial, {}, Tolerances::from_env().unitary).first;
        s.honest = [](const std::string &) { return std::make_shared<IdentityProver>(); };
        s.member = [](const std::string &) { return false; };
        return s;
    }
    return builtin_system(name);
}

ProverPtr select_prover(const QipSystem &s, const std::string &which, const std::string &x) {
    if (which == "honest") {
        return s.honest_prover(x);
    }
    if (which == "identity") {
        return std::make_shared<IdentityProver>();
    }
    if (std::filesystem::is_regular_file(which)) {
        return load_prover_file(which, s.verifier);
    }
    throw UsageFailure("prover must be honest, identity or a prover file: " + which);
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char c : s) {
        q += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return q + "\"";
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void emit(const std::string &format, const json &record, const std::vector<std::string> &columns,
          const std::vector<std::vector<std::string>> &rows) {
    if (format == "csv") {
        for (size_t i = 0; i < columns.size(); ++i) {
            std::cout << (i ? "," : "") << columns[i];
        }
        std::cout << '\n';
        for (const auto &r : rows) {
            for (size_t i = 0; i < r.size(); ++i) {
                std::cout << (i ? "," : "") << csv_field(r[i]);
            }
            std::cout << '\n';
        }
    } else {
        std::cout << record.dump(2) << '\n';
    }
}

json base_record(const std::string &command) {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    return j;
}

int cmd_validate(const std::string &file, const std::string &lengths, const std::string &mode,
                 const std::string &format) {
    QfaSpec partial;
    try {
        partial = load_spec_file(file);
    } catch (const ParseError &e) {
        throw UsageFailure(e.what());
    }
    json rec = base_record("validate");
    rec["file"] = file;
    auto lens = parse_lengths(lengths);
    bool ok = true;
    std::vector<std::vector<std::string>> rows;
    try {
        auto [spec, report] = validate_and_complete(partial, lens, Tolerances::from_env().unitary);
        if (!mode.empty()) {
            StructureMode m = mode == "public"         ? StructureMode::Public
                              : mode == "measure_once" ? StructureMode::MeasureOnce
                              : mode == "one_way"      ? StructureMode::OneWayHalting
                                                       : throw UsageFailure("unknown structure mode: " + mode);
            ValidationReport st = check_structure(spec, m, lens);
            report.violations.insert(report.violations.end(), st.violations.begin(), st.violations.end());
        }
        ok = report.ok();
        json wf = json::object();
        for (auto [n, good] : report.well_formed) {
            wf[std::to_string(n)] = good;
            rows.push_back({std::to_string(n), good ? "true" : "false", ""});
        }
        rec["well_formed"] = wf;
        json viol = json::array();
        for (const auto &v : report.violations) {
            viol.push_back({{"input", v.input}, {"description", v.description}});
            rows.push_back({"", "false", v.description});
        }
        rec["violations"] = viol;
        rec["completed_transitions"] = report.completed_transitions;
        rec["fresh_states"] = report.fresh_states;
    } catch (const OrthonormalityError &e) {
        ok = false;
        rec["violations"] = json::array({{{"input", ""}, {"description", e.what()}}});
        rows.push_back({"", "false", e.what()});
    }
    rec["ok"] = ok;
    emit(format, rec, {"length", "well_formed", "violation"}, rows);
    std::cerr << (ok ? "well-formed" : "NOT well-formed") << '\n';
    return ok ? 0 : 1;
}

int cmd_run(const std::string &protocol, const std::string &x, const std::string &prover, int64_t t_max,
            const std::string &format) {
    QipSystem s = load_system(protocol);
    ProverPtr p = select_prover(s, prover, x);
    RunResult r = run(s, *p, x, t_max);
    json rec = base_record("run");
    rec["system"] = s.name;
    rec["input"] = x;
    rec["prover"] = p->describe();
    rec["p_acc"] = r.p_acc;
    rec["p_rej"] = r.p_rej;
    rec["p_cont"] = r.p_cont;
    rec["rounds_executed"] = r.rounds_executed;
    rec["truncated"] = r.truncated;
    rec["max_conservation_error"] = r.max_conservation_error;
    json prof = json::array();
    for (const auto &h : r.halting_profile) {
        prof.push_back({{"round", h.round}, {"acc", h.acc}, {"rej", h.rej}});
    }
    rec["halting_profile"] = prof;
    emit(format, rec, {"system", "input", "prover", "p_acc", "p_rej", "p_cont", "rounds", "truncated"},
         {{s.name, x, p->describe(), num(r.p_acc), num(r.p_rej), num(r.p_cont), std::to_string(r.rounds_executed),
           r.truncated ? "true" : "false"}});
    std::cerr << s.name << " on '" << x << "': accept " << r.p_acc << ", reject " << r.p_rej << '\n';
    return 0;
}

int cmd_sweep(const std::string &protocol, int n_max, int64_t t_max, const AdversaryBudget &budget,
              bool no_adversary, bool quantum, const std::string &format) {
    QipSystem s = load_system(protocol);
    auto rows = sweep(s, n_max, t_max, budget, !no_adversary, quantum);
    json rec = base_record("sweep");
    rec["system"] = s.name;
    rec["seed"] = budget.seed;
    json arr = json::array();
    std::vector<std::vector<std::string>> table;
    for (const auto &r : rows) {
        json row = {{"x", r.x}, {"member", r.member}, {"honest_p_acc", r.honest_p_acc}};
        std::vector<std::string> line{r.x, r.member ? "true" : "false", num(r.honest_p_acc)};
        if (!no_adversary) {
            row["adversary_p_acc"] = r.adversary_p_acc;
            row["adversary_best"] = r.adversary_best;
            line.push_back(num(r.adversary_p_acc));
        }
        arr.push_back(row);
        table.push_back(line);
    }
    rec["rows"] = arr;
    std::vector<std::string> cols{"x", "member", "honest_p_acc"};
    if (!no_adversary) {
        cols.push_back("adversary_p_acc");
    }
    emit(format, rec, cols, table);
    std::cerr << rows.size() << " rows\n";
    return 0;
}

int cmd_adversary(const std::string &protocol, const std::string &x, const AdversaryBudget &budget, bool classical,
                  bool quantum, int cells, const std::string &format) {
    QipSystem s = load_system(protocol);
    if (!classical && !quantum) {
        classical = true;
    }
    json rec = base_record("adversary");
    rec["system"] = s.name;
    rec["input"] = x;
    rec["seed"] = budget.seed;
    std::vector<std::vector<std::string>> rows;
    AdversaryReport cl;
    bool have_cl = false;
    if (classical) {
        cl = best_classical_prover(s, x, budget);
        have_cl = true;
        rec["classical"] = {{"best_p_acc", cl.best_p_acc},
                            {"strategies_tested", cl.strategies_tested},
                            {"is_exhaustive", cl.is_exhaustive},
                            {"best_strategy", cl.best_strategy}};
        rows.push_back({"classical", num(cl.best_p_acc), std::to_string(cl.strategies_tested),
                        cl.is_exhaustive ? "true" : "false"});
    }
    if (quantum) {
        AdversaryReport q = search_quantum_prover(s, x, cells, budget, have_cl ? &cl : nullptr);
        rec["quantum"] = {{"best_p_acc", q.best_p_acc},
                          {"strategies_tested", q.strategies_tested},
                          {"is_exhaustive", q.is_exhaustive},
                          {"best_restart", q.best_restart},
                          {"best_strategy", q.best_strategy}};
        if (q.quantum) {
            rec["quantum"]["params"] = q.quantum->params;
            rec["quantum"]["base"] = q.quantum->base;
        }
        rows.push_back({"quantum", num(q.best_p_acc), std::to_string(q.strategies_tested), "false"});
    }
    emit(format, rec, {"search", "best_p_acc", "strategies_tested", "is_exhaustive"}, rows);
    for (const auto &r : rows) {
        std::cerr << r[0] << " best acceptance " << r[1] << '\n';
    }
    return 0;
}

int cmd_tiling(const std::string &lang, int n, const std::vector<double> &bound, const std::string &format) {
    json rec = base_record("tiling");
    if (!bound.empty()) {
        if (bound.size() != 5) {
            throw UsageFailure("--bound takes q g dlt c eps");
        }
        auto v = tiling_bound(static_cast<int64_t>(bound[0]), static_cast<int64_t>(bound[1]),
                              static_cast<int64_t>(bound[2]), static_cast<int64_t>(bound[3]), bound[4]);
        rec["bound"] = v.str();
        emit(format, rec, {"bound"}, {{v.str()}});
        std::cerr << v.str() << '\n';
        return 0;
    }
    LanguageId id;
    try {
        id = parse_language(lang);
    } catch (const DomainError &e) {
        throw UsageFailure(e.what());
    }
    TilingInstance inst = tiling_instance(id, n);
    Tiling t = minimum_tiling(inst);
    rec["language"] = lang;
    rec["n"] = n;
    rec["complexity"] = t.tiles.size();
    json tiles = json::array();
    for (const auto &tile : t.tiles) {
        json rows = json::array();
        json cols = json::array();
        for (int r : tile.rows) {
            rows.push_back(inst.index[r]);
        }
        for (int c : tile.cols) {
            cols.push_back(inst.index[c]);
        }
        tiles.push_back({{"rows", rows}, {"cols", cols}});
    }
    rec["tiles"] = tiles;
    emit(format, rec, {"language", "n", "complexity"}, {{lang, std::to_string(n), std::to_string(t.tiles.size())}});
    std::cerr << "minimum 1-tiling size " << t.tiles.size() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Simulator for quantum interactive proof systems with finite-automaton verifiers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    std::string format = "json";
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    int jobs = 1;
    app.add_option("--jobs", jobs, "Worker threads (runs are sequential; kept for interface stability)");

    std::string file, lengths = "0..6", mode;
    auto *validate = app.add_subcommand("validate", "Complete a spec file and check well-formedness");
    validate->add_option("file", file, "Spec file")->required();
    validate->add_option("--lengths", lengths, "Input lengths, e.g. 0..6 or 1,3,5");
    validate->add_option("--structure", mode, "Also check public, measure_once or one_way structure");

    std::string protocol, input, prover = "honest";
    int64_t t_max = 0;
    auto *runc = app.add_subcommand("run", "Run a protocol on one input");
    runc->add_option("--protocol", protocol, "Built-in name (name:key=value) or spec file")->required();
    runc->add_option("--input", input, "Input string");
    runc->add_option("--prover", prover, "honest, identity or a prover file");
    runc->add_option("--t-max", t_max, "Round limit for two-way verifiers (0 selects the default)");

    AdversaryBudget budget;
    int n_max = 3;
    bool no_adv = false, quantum = false, classical = false;
    int cells = 1;
    auto add_budget = [&](CLI::App *c) {
        c->add_option("--memory", budget.memory_states, "Classical prover memory states");
        c->add_option("--steps", budget.steps, "Prover rounds searched (0 means all)");
        c->add_option("--restarts", budget.restarts, "Quantum search restarts");
        c->add_option("--iterations", budget.iterations, "Quantum coordinate steps per restart");
        c->add_option("--seed", budget.seed, "Random seed");
        c->add_option("--node-cap", budget.node_cap, "Classical search node cap");
        c->add_option("--max-dim", budget.max_dim, "Quantum prover dimension cap");
    };
    auto *sweepc = app.add_subcommand("sweep", "Tabulate acceptance over all short inputs");
    sweepc->add_option("--protocol", protocol, "Built-in name or spec file")->required();
    sweepc->add_option("--n-max", n_max, "Longest input");
    sweepc->add_option("--t-max", t_max, "Round limit");
    sweepc->add_flag("--no-adversary", no_adv, "Skip the adversary column");
    sweepc->add_flag("--quantum", quantum, "Include quantum search in the adversary column");
    add_budget(sweepc);

    auto *advc = app.add_subcommand("adversary", "Search for cheating provers on one input");
    advc->add_option("--protocol", protocol, "Built-in name or spec file")->required();
    advc->add_option("--input", input, "Input string");
    advc->add_flag("--classical", classical, "Exhaustive classical search");
    advc->add_flag("--quantum", quantum, "Randomized quantum search");
    advc->add_option("--cells", cells, "Prover tape cells for quantum search");
    advc->add_option("--t-max", budget.t_max, "Round limit");
    add_budget(advc);

    std::string lang = "la";
    int tn = 1;
    std::vector<double> bound;
    auto *tilc = app.add_subcommand("tiling", "Minimum 1-tiling size, or the closed-form bound");
    tilc->add_option("--lang", lang, "Language name (zero, la, odd, upal, center, pal_sharp, empty, universal, dfa:NAME)");
    tilc->add_option("--n", tn, "Longest string in the matrix index");
    tilc->add_option("--bound", bound, "q g dlt c eps")->expected(5);

    auto *listc = app.add_subcommand("list", "List built-in protocols");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate) {
            return cmd_validate(file, lengths, mode, format);
        }
        if (*runc) {
            return cmd_run(protocol, input, prover, t_max, format);
        }
        if (*sweepc) {
            return cmd_sweep(protocol, n_max, t_max, budget, no_adv, quantum, format);
        }
        if (*advc) {
            return cmd_adversary(protocol, input, budget, classical, quantum, cells, format);
        }
        if (*tilc) {
            return cmd_tiling(lang, tn, bound, format);
        }
        if (*listc) {
            json rec = base_record("list");
            rec["protocols"] = builtin_system_names();
            std::vector<std::vector<std::string>> rows;
            for (const auto &n : builtin_system_names()) {
                rows.push_back({n});
            }
            emit(format, rec, {"protocol"}, rows);
            return 0;
        }
    } catch (const UsageFailure &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError &e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const AlphabetError &e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
