#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "raogeo_cli/config.hpp"

namespace raogeo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kSchemaVersion = 1;

/// Payload of one command. `table` is the CSV form for tabular commands.
struct CommandOutput {
  nlohmann::json result = nlohmann::json::object();
  nlohmann::json residuals = nlohmann::json::object();
  std::string table;
  bool failed = false;  ///< a property suite reported a failure
};

/// Runs a resolved configuration; fills defaults into `cfg` so that the
/// echo describes the run completely.
CommandOutput execute(RunConfig& cfg);

/// Parses arguments (without the program name), runs the command and writes
/// the envelope to `out` (or the configured path). Diagnostics go to `err`.
/// Returns 0, 2 (usage) or 3 (numeric/solver failure).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Numbers from a CSV file: every field of every row, skipping blank lines,
/// '#' comments and a non-numeric header row.
std::vector<double> read_csv_numbers(const std::string& path, bool first_column_only);

}  // namespace raogeo::cli
