#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace raogeo::cli {

/// Numeric defaults. These are the only place the defaults live.
struct NumericConfig {
  double quadrature_tol = 1e-10;
  int ode_steps = 1000;
  double newton_tol = 1e-12;
};

struct OutputConfig {
  std::string path;  ///< empty: standard output
  std::string format = "json";
};

/// Fully resolved description of one run. `args` holds the command-specific
/// options under their snake_case keys.
struct RunConfig {
  std::string command;
  std::string family;
  std::string chart;
  NumericConfig numeric;
  std::optional<std::uint64_t> seed;
  OutputConfig output;
  nlohmann::json args = nlohmann::json::object();
};

enum class ArgKind { Real, Integer, Text, Reals, Texts };

struct ArgSpec {
  std::string key;   ///< JSON key; the flag is the key with '_' -> '-'
  ArgKind kind;
  bool required = false;
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  bool needs_family = true;
  std::vector<ArgSpec> args;
};

const std::vector<CommandSpec>& command_specs();
const CommandSpec& command_spec(const std::string& name);

nlohmann::json to_json(const RunConfig& cfg);
/// Validates keys and types; unknown keys and non-positive tolerances are
/// usage errors. Does not check required command arguments.
RunConfig config_from_json(const nlohmann::json& j);
/// Throws UsageError naming the first missing required argument.
void check_required(const RunConfig& cfg);

/// Recursive merge of JSON objects; values in `overlay` win.
nlohmann::json merge_json(nlohmann::json base, const nlohmann::json& overlay);

}  // namespace raogeo::cli
