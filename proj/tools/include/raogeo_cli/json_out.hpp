#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

namespace raogeo::cli {

/// Serializes with every floating-point number printed to 17 significant
/// digits (always with a decimal point or exponent). Non-finite numbers
/// become the strings "inf", "-inf" and "nan".
void write_json(std::ostream& out, const nlohmann::json& value, int indent = 2);
std::string dump_json(const nlohmann::json& value, int indent = 2);

/// JSON value for a double, mapping non-finite values to strings.
nlohmann::json number(double x);

/// Reads a real from a JSON number or one of the non-finite strings.
double read_real(const nlohmann::json& value, const std::string& key);

}  // namespace raogeo::cli
