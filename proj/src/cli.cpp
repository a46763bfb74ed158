#include "mfg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mfg/control.hpp"
#include "mfg/equilibrium.hpp"
#include "mfg/expr.hpp"
#include "mfg/monotonicity.hpp"
#include "mfg/serialize.hpp"

namespace mfg::cli {

using out::Json;

namespace {

double parse_number(std::string_view s, const std::string& what) {
    // from_chars rejects a leading '+'
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError(what + ": '" + std::string(s) + "' is not a finite number");
    return v;
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

}  // namespace

DiscreteMeasure parse_m0(const std::string& text) {
    std::vector<double> atoms, weights;
    std::stringstream ss(text);
    std::string item;
    std::size_t k = 0;
    while (std::getline(ss, item, ',')) {
        ++k;
        const auto colon = item.find(':');
        const std::string where = "--m0 entry " + std::to_string(k);
        if (colon == std::string::npos) throw ConfigError(where + ": expected x:w, got '" + trim(item) + "'");
        atoms.push_back(parse_number(trim(item.substr(0, colon)), where + " atom"));
        weights.push_back(parse_number(trim(item.substr(colon + 1)), where + " weight"));
    }
    if (atoms.empty()) throw ConfigError("--m0: no atoms given");
    try {
        return DiscreteMeasure(std::move(atoms), std::move(weights));
    } catch (const Error& e) {
        throw ConfigError(std::string("--m0: ") + e.what());
    }
}

std::pair<std::string, double> parse_param(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param: expected k=v, got '" + text + "'");
    const std::string key = trim(text.substr(0, eq));
    return {key, parse_number(trim(text.substr(eq + 1)), "--param " + key)};
}

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::string field_location(const std::string& text, const std::string& field) {
    const auto pos = text.find("\"" + field + "\"");
    if (pos == std::string::npos) return "field '" + field + "'";
    return "line " + std::to_string(line_of_offset(text, pos)) + ", field '" + field + "'";
}

bool kept(const std::vector<std::string>& keep, const std::string& k) {
    return std::find(keep.begin(), keep.end(), k) != keep.end();
}

}  // namespace

void load_config_text(const std::string& text, RunConfig& cfg, const std::vector<std::string>& keep) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config line " + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                          ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw ConfigError("config line 1: top level must be an object");
    auto where = [&](const std::string& f) { return "config " + field_location(text, f); };
    auto need_string = [&](const std::string& f, const Json& v) {
        if (!v.is_string()) throw ConfigError(where(f) + ": expected a string");
        return v.get<std::string>();
    };
    auto need_number = [&](const std::string& f, const Json& v) {
        if (!v.is_number()) throw ConfigError(where(f) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where(f) + ": must be finite");
        return d;
    };
    auto need_count = [&](const std::string& f, const Json& v) -> std::uint64_t {
        if (!v.is_number_unsigned()) throw ConfigError(where(f) + ": expected a non-negative integer");
        return v.get<std::uint64_t>();
    };
    for (const auto& [key, v] : j.items()) {
        if (kept(keep, key)) continue;
        if (key == "command") cfg.command = need_string(key, v);
        else if (key == "scenario") cfg.scenario = need_string(key, v);
        else if (key == "params") {
            if (!v.is_object()) throw ConfigError(where(key) + ": expected an object of numbers");
            for (const auto& [pk, pv] : v.items()) cfg.params[pk] = need_number(pk, pv);
        } else if (key == "m0") {
            try {
                if (v.is_string()) cfg.m0 = parse_m0(v.get<std::string>());
                else if (v.is_object()) cfg.m0 = ser::measure_from_json(Json{{"dim", 1}, {"atoms", v.at("atoms")}, {"weights", v.at("weights")}});
                else throw ConfigError("expected \"x:w,...\" or {atoms, weights}");
            } catch (const ConfigError& e) {
                throw ConfigError(where(key) + ": " + e.what());
            } catch (const std::exception& e) {
                throw ConfigError(where(key) + ": " + e.what());
            }
        } else if (key == "T") cfg.T = need_number(key, v);
        else if (key == "tol") cfg.tol = need_number(key, v);
        else if (key == "seed") cfg.seed = need_count(key, v);
        else if (key == "budget") cfg.budget = static_cast<std::size_t>(need_count(key, v));
        else if (key == "out") cfg.out = need_string(key, v);
        else if (key == "format") cfg.format = need_string(key, v);
        else if (key == "condition") cfg.condition = need_string(key, v);
        else if (key == "case") cfg.case_id = need_string(key, v);
        else if (key == "phi") cfg.phi = need_string(key, v);
        else if (key == "preset") cfg.preset = need_string(key, v);
        else throw ConfigError(where(key) + ": unknown field");
    }
}

void load_config(const std::string& path, RunConfig& cfg, const std::vector<std::string>& keep) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    load_config_text(ss.str(), cfg, keep);
}

Json config_echo(const RunConfig& cfg) {
    Json j;
    j["command"] = cfg.command;
    if (!cfg.scenario.empty()) j["scenario"] = cfg.scenario;
    if (!cfg.params.empty()) {
        Json p = Json::object();
        for (const auto& [k, v] : cfg.params) p[k] = v;
        j["params"] = p;
    }
    if (cfg.m0) j["m0"] = ser::to_json(*cfg.m0);
    if (cfg.T) j["T"] = *cfg.T;
    j["tol"] = cfg.tol;
    if (cfg.command == "check") {
        j["seed"] = cfg.seed;
        j["budget"] = cfg.budget;
        j["condition"] = cfg.condition;
    }
    if (!cfg.case_id.empty()) j["case"] = cfg.case_id;
    if (!cfg.phi.empty()) j["phi"] = cfg.phi;
    if (!cfg.preset.empty()) j["preset"] = cfg.preset;
    j["format"] = cfg.format;
    return j;
}

namespace {

Scenario scenario_of(const RunConfig& cfg) {
    if (cfg.scenario.empty()) throw ConfigError("--scenario is required");
    try {
        return catalog(cfg.scenario, cfg.params);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("--scenario: ") + e.what());
    }
}

void validate_tol(const RunConfig& cfg) {
    if (!(cfg.tol > 0.0)) throw ConfigError("--tol must be positive");
    if (cfg.T && !(*cfg.T > 0.0)) throw ConfigError("--T must be positive");
}

Json assertion_json(const repro::Assertion& a) {
    return Json{{"name", a.name}, {"lhs", a.lhs}, {"rhs", a.rhs}, {"pass", a.pass}};
}

}  // namespace

CommandOutput cmd_solve(const RunConfig& cfg) {
    validate_tol(cfg);
    const Scenario s = scenario_of(cfg);
    if (!s.is_factored()) throw ConfigError("--scenario: '" + s.name + "' has no terminal statistic to solve for");
    double T = cfg.T.value_or(1.0);
    CommandOutput res;
    DiscreteMeasure m0 = cfg.m0.value_or(DiscreteMeasure::dirac(s.params.count("x0") ? s.params.at("x0") : 0.0));
    if (s.name == "ll_two_equilibria" && !cfg.T) {
        const auto h = two_equilibria_horizon(s);
        T = h.T;
        res.results["horizon"] = {{"tau", h.tau}, {"y_star", h.y_star}, {"T", h.T}};
    }
    const EquilibriumSet es = enumerate_equilibria(s, m0, T);
    res.results["scenario"] = s.name;
    res.results["T"] = T;
    res.results["m0"] = ser::to_json(m0);
    res.results["equilibria"] = ser::to_json(es);
    res.table.header = {"equilibrium", "sigma", "selection", "multiplicity", "atom", "weight", "consistency_residual"};
    for (std::size_t k = 0; k < es.equilibria.size(); ++k) {
        const auto& e = es.equilibria[k];
        res.assertions.push_back(repro::le("sigma consistency, equilibrium " + std::to_string(k), e.consistency_residual,
                                           cfg.tol * (1.0 + std::abs(e.sigma))));
        for (std::size_t i = 0; i < e.measure.size(); ++i)
            res.table.rows.push_back({Json(k), Json(e.sigma), Json(e.selection), Json(multiplicity_name(e.multiplicity)),
                                      Json(e.measure.x(i)), Json(e.measure.weight(i)), Json(e.consistency_residual)});
    }
    const bool all = std::all_of(res.assertions.begin(), res.assertions.end(), [](const auto& a) { return a.pass; });
    res.exit_code = (es.equilibria.empty() || !all) ? solver_failure : ok;
    if (es.equilibria.empty()) res.results["diagnostic"] = "no equilibrium found on the scanned bracket";
    return res;
}

CommandOutput cmd_check(const RunConfig& cfg) {
    validate_tol(cfg);
    const Scenario s = scenario_of(cfg);
    const auto cond = parse_condition(cfg.condition);
    if (!cond) throw ConfigError("--condition must be one of LL, D, sigma, L2, -sigma, -L2");
    if (cfg.budget == 0) throw ConfigError("--budget must be positive");
    SamplerConfig sc;
    sc.budget = cfg.budget;
    if (cfg.m0) sc.m0_family = {*cfg.m0};
    if (cfg.T) sc.T_values = {*cfg.T};
    const MonotonicityReport rep = refute(s, *cond, sc, cfg.seed);
    CommandOutput res;
    res.results["scenario"] = s.name;
    res.results["report"] = ser::to_json(rep);
    const double floor = rep.witness ? -1e-9 * (1.0 + std::abs(rep.witness->lhs) + std::abs(rep.witness->rhs)) : 0.0;
    res.assertions.push_back({"no violation of " + condition_name(*cond), rep.worst_margin(), floor, !rep.violated});
    res.table.header = {"kind", "condition", "lhs", "rhs", "margin", "T", "s1", "s2", "pick1", "pick2"};
    auto row = [&](const char* kind, const Witness& w) {
        const bool param = w.condition == Condition::sigma || w.condition == Condition::neg_sigma;
        const bool lifted = param || w.condition == Condition::L2 || w.condition == Condition::neg_L2;
        res.table.rows.push_back({Json(kind), Json(condition_name(w.condition)), Json(w.lhs), Json(w.rhs), Json(w.margin),
                                  lifted ? Json(w.T) : Json(), param ? Json(w.s1) : Json(), param ? Json(w.s2) : Json(),
                                  lifted ? Json(pick_name(w.pick1)) : Json(), lifted ? Json(pick_name(w.pick2)) : Json()});
    };
    if (rep.witness) row("worst", *rep.witness);
    if (rep.shrunk) row("shrunk", *rep.shrunk);
    res.exit_code = rep.violated ? violated : ok;
    return res;
}

CommandOutput cmd_repro(const RunConfig& cfg) {
    if (cfg.case_id.empty()) throw ConfigError("--case is required");
    repro::CaseResult cr;
    try {
        cr = repro::run_case(cfg.case_id);
    } catch (const DomainError& e) {
        const auto& ids = repro::case_ids();
        if (std::find(ids.begin(), ids.end(), cfg.case_id) == ids.end()) throw ConfigError(std::string("--case: ") + e.what());
        throw;
    }
    CommandOutput res;
    res.results = cr.results;
    res.assertions = cr.assertions;
    res.table.header = {"name", "lhs", "rhs", "pass"};
    for (const auto& a : cr.assertions) res.table.rows.push_back({Json(a.name), Json(a.lhs), Json(a.rhs), Json(a.pass)});
    res.exit_code = cr.passed() ? ok : violated;
    return res;
}

CommandOutput cmd_shock(const RunConfig& cfg) {
    validate_tol(cfg);
    if (cfg.phi.empty() == cfg.preset.empty()) throw ConfigError("give exactly one of --phi and --preset");
    std::string text;
    try {
        text = cfg.preset.empty() ? cfg.phi : expr::preset_text(cfg.preset);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("--preset: ") + e.what());
    }
    expr::Expression e;
    try {
        e = expr::Expression::parse(text);
    } catch (const expr::ParseError& pe) {
        throw ConfigError(std::string("--phi: ") + pe.what());
    }
    const ShockSearch found = find_shock(e.function());
    CommandOutput res;
    res.results["phi"] = text;
    res.results["steps"] = found.steps;
    res.table.header = {"found", "t", "x", "y_lower", "y_upper", "value_lower", "value_upper", "reason"};
    if (found.certificate) {
        const auto& c = *found.certificate;
        res.results["certificate"] = ser::to_json(c);
        res.assertions.push_back(repro::le("value gap", std::abs(c.value_upper - c.value_lower), cfg.tol));
        res.assertions.push_back(repro::ge("separation", c.y_upper - c.y_lower, 0.0));
        res.table.rows.push_back({Json(true), Json(c.t), Json(c.x), Json(c.y_lower), Json(c.y_upper), Json(c.value_lower),
                                  Json(c.value_upper), Json("")});
        const bool all = std::all_of(res.assertions.begin(), res.assertions.end(), [](const auto& a) { return a.pass; });
        res.exit_code = all ? ok : solver_failure;
    } else {
        res.results["reason"] = found.reason;
        res.table.rows.push_back({Json(false), Json(), Json(), Json(), Json(), Json(), Json(), Json(found.reason)});
        res.exit_code = not_found;
    }
    return res;
}

std::string render(const RunConfig& cfg, const CommandOutput& res) {
    if (cfg.format == "csv") return out::to_csv(res.table);
    Json doc;
    doc["schema_version"] = 1;
    doc["command"] = cfg.command;
    doc["config_echo"] = config_echo(cfg);
    doc["results"] = res.results;
    Json arr = Json::array();
    for (const auto& a : res.assertions) arr.push_back(assertion_json(a));
    doc["assertions"] = std::move(arr);
    doc["exit_code"] = res.exit_code;
    return out::dump(doc);
}

namespace {

void print_summary(std::ostream& os, const RunConfig& cfg, const CommandOutput& res, bool color) {
    const char* green = color ? "\033[32m" : "";
    const char* red = color ? "\033[31m" : "";
    const char* reset = color ? "\033[0m" : "";
    for (const auto& a : res.assertions)
        os << (a.pass ? green : red) << (a.pass ? "PASS" : "FAIL") << reset << "  " << a.name << "  (lhs "
           << out::format_double(a.lhs) << ", rhs " << out::format_double(a.rhs) << ")\n";
    os << cfg.command << ": exit " << res.exit_code << "\n";
}

void list_all(std::ostream& os) {
    os << "scenarios:";
    for (const auto& n : catalog_names()) os << " " << n;
    os << "\nconditions: LL D sigma L2 -sigma -L2\ncases:";
    for (const auto& c : repro::case_ids()) os << " " << c;
    os << "\npresets:";
    for (const auto& p : expr::presets()) os << " " << p.name << "=" << p.text;
    os << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& os, std::ostream& err, bool color) {
    CLI::App app{"Equilibria, monotonicity checks and shock search for mean field games"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string config_path, m0_text;
    std::vector<std::string> params;
    double T = 0.0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override its fields");
        sub->add_option("--out", cfg.out, "result file (written atomically); stdout if absent");
        sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--tol", cfg.tol, "tolerance for reported assertions");
    };
    auto scenario_opts = [&](CLI::App* sub) {
        sub->add_option("--scenario", cfg.scenario, "catalog entry");
        sub->add_option("--param", params, "scenario parameter k=v (repeatable)");
        sub->add_option("--m0", m0_text, "initial measure x1:w1,x2:w2,...");
        sub->add_option("--T", T, "horizon");
    };
    CLI::App* solve = app.add_subcommand("solve", "enumerate equilibria");
    common(solve);
    scenario_opts(solve);
    CLI::App* check = app.add_subcommand("check", "search for a violation of a monotonicity condition");
    common(check);
    scenario_opts(check);
    check->add_option("--condition", cfg.condition, "LL, D, sigma, L2, -sigma or -L2");
    check->add_option("--seed", cfg.seed, "sampler seed");
    check->add_option("--budget", cfg.budget, "number of samples");
    CLI::App* repro_cmd = app.add_subcommand("repro", "run the scripted checks of a worked example");
    common(repro_cmd);
    repro_cmd->add_option("--case", cfg.case_id, "case id (see `list`)");
    CLI::App* shock = app.add_subcommand("shock", "search for a shock of the Hopf-Lax problem");
    common(shock);
    shock->add_option("--phi", cfg.phi, "initial datum, e.g. \"-exp(-y^2)\"");
    shock->add_option("--preset", cfg.preset, "named initial datum");
    CLI::App* list = app.add_subcommand("list", "list scenarios, conditions, cases and presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        os << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return config_error;
    }
    if (list->parsed()) {
        list_all(os);
        return ok;
    }
    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();

    try {
        std::vector<std::string> keep;
        for (const auto* opt : sub->get_options()) {
            if (opt->count() == 0) continue;
            std::string name = opt->get_name();
            while (!name.empty() && name.front() == '-') name.erase(0, 1);
            keep.push_back(name == "param" ? "params" : name);
        }
        if (!config_path.empty()) load_config(config_path, cfg, keep);
        const auto given = [&](const char* flag) { return std::find(keep.begin(), keep.end(), flag) != keep.end(); };
        for (const auto& p : params) cfg.params.insert_or_assign(parse_param(p).first, parse_param(p).second);
        if (given("m0")) cfg.m0 = parse_m0(m0_text);
        if (given("T")) cfg.T = T;
        if (cfg.format != "json" && cfg.format != "csv") throw ConfigError("--format must be json or csv");
        if (!cfg.command.empty() && cfg.command != sub->get_name())
            throw ConfigError("config field 'command' says '" + cfg.command + "' but the subcommand is " + sub->get_name());
        cfg.command = sub->get_name();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return config_error;
    }

    CommandOutput res;
    try {
        if (cfg.command == "solve") res = cmd_solve(cfg);
        else if (cfg.command == "check") res = cmd_check(cfg);
        else if (cfg.command == "repro") res = cmd_repro(cfg);
        else res = cmd_shock(cfg);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return config_error;
    } catch (const Error& e) {
        err << "solver failure: " << e.what() << "\n";
        return solver_failure;
    }

    const std::string doc = render(cfg, res);
    try {
        if (cfg.out.empty()) {
            os << doc;
            print_summary(err, cfg, res, color);
        } else {
            out::write_atomic(cfg.out, doc);
            print_summary(os, cfg, res, color);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return solver_failure;
    }
    return res.exit_code;
}

}  // namespace mfg::cli
