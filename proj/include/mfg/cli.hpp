#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfg/error.hpp"
#include "mfg/json_out.hpp"
#include "mfg/measure.hpp"
#include "mfg/models.hpp"
#include "mfg/repro.hpp"

namespace mfg::cli {

enum ExitCode : int { ok = 0, config_error = 1, solver_failure = 2, violated = 3, not_found = 4 };

/// Malformed flags or config file; the message names the line and field.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string command;
    std::string scenario;
    ParamRecord params;
    std::optional<DiscreteMeasure> m0;
    std::optional<double> T;
    double tol = 1e-8;
    std::uint64_t seed = 1;
    std::size_t budget = 10000;
    std::string out;
    std::string format = "json";
    std::string condition;
    std::string case_id;
    std::string phi;
    std::string preset;
};

/// "x1:w1,x2:w2,..." with weights summing to one.
DiscreteMeasure parse_m0(const std::string& text);
/// "k=v".
std::pair<std::string, double> parse_param(const std::string& text);

/// Merge a JSON config file into cfg. Fields already set by flags win when
/// `keep` lists them.
void load_config(const std::string& path, RunConfig& cfg, const std::vector<std::string>& keep);
void load_config_text(const std::string& text, RunConfig& cfg, const std::vector<std::string>& keep);

out::Json config_echo(const RunConfig& cfg);

struct CommandOutput {
    out::Json results = out::Json::object();
    std::vector<repro::Assertion> assertions;
    out::Table table;
    int exit_code = ok;
};

CommandOutput cmd_solve(const RunConfig& cfg);
CommandOutput cmd_check(const RunConfig& cfg);
CommandOutput cmd_repro(const RunConfig& cfg);
CommandOutput cmd_shock(const RunConfig& cfg);

/// The result document in cfg.format.
std::string render(const RunConfig& cfg, const CommandOutput& res);

/// Entry point behind the executable. `color` enables ANSI in the summary.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, bool color);

}  // namespace mfg::cli
