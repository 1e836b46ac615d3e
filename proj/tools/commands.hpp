#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "weber/utility.hpp"

namespace weber::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;

inline constexpr const char* kSchemaTag = "weber-bargain/result/v1";

/// Bad or missing configuration; `key()` is the dotted path of the culprit.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct UtilitySpec {
    /// Power exponent, set for {"family": "power", "p": ...}.
    std::optional<double> p;
    /// Source text, set for {"expr": "..."}.
    std::optional<std::string> expr;
};

struct SweepGrid {
    std::vector<double> p, q, k1, k2;
};

struct ProblemConfig {
    double X = 1.0;
    UtilitySpec utility1;
    UtilitySpec utility2;
    double d1 = 0.0;
    double d2 = 0.0;
    std::optional<double> k1;
    std::optional<double> k2;
    std::optional<SweepGrid> sweep;
    Json raw;
};

ProblemConfig parse_config(std::string_view text);
ProblemConfig load_config(const std::string& path);

BargainingProblem make_problem(const ProblemConfig& cfg);
WeberParams make_weber_params(const ProblemConfig& cfg);

enum class Format { Json, Csv };

struct Options {
    double tol = 1e-9;
    int max_rounds = 10000;
    std::optional<double> alpha;
    int samples = 101;
    bool timestamp = true;
    std::optional<Format> format;
};

struct CommandResult {
    int exit_code = kExitOk;
    Json document;
    /// Primary CSV table, when the command or requested format produces one.
    std::string csv;
    /// Extra CSV tables keyed by file suffix (plotdata thresholds).
    std::vector<std::pair<std::string, std::string>> extra_csv;
};

CommandResult cmd_solve(const ProblemConfig& cfg, const Options& opt);
CommandResult cmd_iterate(const ProblemConfig& cfg, const Options& opt);
CommandResult cmd_nash(const ProblemConfig& cfg, const Options& opt);
CommandResult cmd_plotdata(const ProblemConfig& cfg, const Options& opt);
CommandResult cmd_sweep(const ProblemConfig& cfg, const Options& opt);
CommandResult cmd_check(const ProblemConfig& cfg, const Options& opt);

/// Indented JSON with every double printed to 17 significant digits.
std::string to_json_text(const Json& doc);
/// Document flattened to "dotted.key,value" rows.
std::string to_key_value_csv(const Json& doc);
/// Locale-independent "%.17g".
std::string format_double(double v);

}  // namespace weber::cli
