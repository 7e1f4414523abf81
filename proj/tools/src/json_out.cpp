#include "raogeo_cli/json_out.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "raogeo/error.hpp"

namespace raogeo::cli {

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

void write_value(std::ostream& out, const nlohmann::json& v, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (v.type()) {
    case nlohmann::json::value_t::number_float:
      out << format_double(v.get<double>());
      return;
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << '{' << nl;
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad << nlohmann::json(it.key()).dump() << sep;
        write_value(out, it.value(), indent, depth + 1);
      }
      out << nl << close_pad << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool scalar = true;
      for (const auto& e : v) scalar = scalar && !e.is_structured();
      out << '[';
      if (!scalar) out << nl;
      bool first = true;
      for (const auto& e : v) {
        if (!first) out << (scalar ? ", " : ",") << (scalar ? "" : nl);
        first = false;
        if (!scalar) out << pad;
        write_value(out, e, indent, depth + 1);
      }
      if (!scalar) out << nl << close_pad;
      out << ']';
      return;
    }
    default:
      out << v.dump();
  }
}

}  // namespace

void write_json(std::ostream& out, const nlohmann::json& value, int indent) {
  write_value(out, value, indent, 0);
  out << '\n';
}

std::string dump_json(const nlohmann::json& value, int indent) {
  std::ostringstream s;
  write_json(s, value, indent);
  return s.str();
}

nlohmann::json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double read_real(const nlohmann::json& value, const std::string& key) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw UsageError("'" + key + "' must be a number");
}

}  // namespace raogeo::cli
