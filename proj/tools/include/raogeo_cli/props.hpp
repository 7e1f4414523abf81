#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "raogeo_cli/config.hpp"

namespace raogeo::cli {

struct PropertyReport {
  std::string name;
  long trials = 0;
  /// Worst observed value of the checked quantity: the smallest slack for
  /// lower-bounded properties, the largest residual otherwise.
  double worst = 0.0;
  double threshold = 0.0;
  bool lower_bound = false;  ///< pass iff worst >= threshold (else worst < threshold)
  bool passed = true;
  nlohmann::json counterexample;  ///< null when passed
};

struct SuiteReport {
  std::string suite;
  long trials = 0;
  std::uint64_t seed = 0;
  std::vector<PropertyReport> properties;
  bool passed = true;
};

const std::vector<std::string>& suite_names();
SuiteReport run_suite(const std::string& suite, long trials, std::uint64_t seed,
                      const NumericConfig& numeric);
nlohmann::json to_json(const SuiteReport& report);

}  // namespace raogeo::cli
