#include "raogeo_cli/config.hpp"

#include <algorithm>
#include <cmath>

#include "raogeo/error.hpp"
#include "raogeo_cli/json_out.hpp"

namespace raogeo::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw UsageError("unknown configuration key '" + where + it.key() + "'");
}

std::string read_text(const json& v, const std::string& key) {
  if (!v.is_string()) throw UsageError("'" + key + "' must be a string");
  return v.get<std::string>();
}

long long read_integer(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
  }
  throw UsageError("'" + key + "' must be an integer");
}

void check_arg(const ArgSpec& spec, const json& v) {
  switch (spec.kind) {
    case ArgKind::Real:
      read_real(v, spec.key);
      break;
    case ArgKind::Integer:
      read_integer(v, spec.key);
      break;
    case ArgKind::Text:
      read_text(v, spec.key);
      break;
    case ArgKind::Reals:
      if (!v.is_array()) throw UsageError("'" + spec.key + "' must be a list of numbers");
      for (const auto& e : v) read_real(e, spec.key);
      break;
    case ArgKind::Texts:
      if (!v.is_array()) throw UsageError("'" + spec.key + "' must be a list of strings");
      for (const auto& e : v) read_text(e, spec.key);
      break;
  }
}

}  // namespace

const std::vector<CommandSpec>& command_specs() {
  static const std::vector<CommandSpec> specs = {
      {"fisher",
       "Fisher information matrix at a parameter point",
       true,
       {{"theta", ArgKind::Reals, true, "parameter coordinates in --chart"},
        {"method", ArgKind::Text, false,
         "score-outer | neg-hessian | sqrt-form | analytic | monte-carlo"},
        {"mc_samples", ArgKind::Integer, false, "sample count for monte-carlo"}}},
      {"crlb-sim",
       "Monte Carlo estimator covariance against the Cramer-Rao bound",
       true,
       {{"theta", ArgKind::Reals, true, "true parameter in --chart"},
        {"estimator", ArgKind::Text, true, "estimator name"},
        {"n", ArgKind::Integer, true, "sample size per replicate"},
        {"replicates", ArgKind::Integer, true, "number of replicates"},
        {"threads", ArgKind::Integer, false, "worker threads (0: all cores)"},
        {"estimates", ArgKind::Text, false, "CSV path for per-replicate estimates"}}},
      {"div",
       "divergence between two members or two discrete distributions",
       false,
       {{"kind", ArgKind::Text, true,
         "kl | rkl | alpha:A | hellinger | bhattacharyya | f:NAME"},
        {"theta1", ArgKind::Reals, false, "first member"},
        {"theta2", ArgKind::Reals, false, "second member"},
        {"discrete", ArgKind::Texts, false, "two CSV files with probability vectors"}}},
      {"expfam",
       "exponential-family duality operations",
       true,
       {{"op", ArgKind::Text, true,
         "to-natural | to-expectation | conjugate | bregman | mle"},
        {"theta", ArgKind::Reals, false, "natural parameter"},
        {"eta", ArgKind::Reals, false, "expectation parameter"},
        {"theta1", ArgKind::Reals, false, "first natural parameter"},
        {"theta2", ArgKind::Reals, false, "second natural parameter"},
        {"data", ArgKind::Text, false, "CSV sample batch, one sample per row"}}},
      {"rao",
       "Rao (Fisher-Rao geodesic) distance",
       true,
       {{"theta1", ArgKind::Reals, true, "first point"},
        {"theta2", ArgKind::Reals, true, "second point"},
        {"method", ArgKind::Text, false, "ode | closed"}}},
      {"geodesic",
       "connecting geodesic with an optional CSV trace",
       true,
       {{"theta1", ArgKind::Reals, true, "start point"},
        {"theta2", ArgKind::Reals, true, "end point"},
        {"trace", ArgKind::Text, false, "CSV path for (t, theta, speed) nodes"}}},
      {"props",
       "randomized property suites",
       false,
       {{"suite", ArgKind::Text, true,
         "monotonicity | invariance | duality | cosine | hellinger"},
        {"trials", ArgKind::Integer, false, "trials per property (default 100)"}}},
  };
  return specs;
}

const CommandSpec& command_spec(const std::string& name) {
  for (const auto& c : command_specs())
    if (c.name == name) return c;
  throw UsageError("unknown command '" + name + "'");
}

json to_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["family"] = cfg.family;
  j["chart"] = cfg.chart;
  j["numeric"] = {{"quadrature_tol", cfg.numeric.quadrature_tol},
                  {"ode_steps", cfg.numeric.ode_steps},
                  {"newton_tol", cfg.numeric.newton_tol}};
  j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  j["output"] = {{"path", cfg.output.path}, {"format", cfg.output.format}};
  j["args"] = cfg.args;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("configuration must be a JSON object");
  reject_unknown(j, {"command", "family", "chart", "numeric", "seed", "output", "args"}, "");
  RunConfig cfg;
  if (!j.contains("command")) throw UsageError("no command given");
  cfg.command = read_text(j["command"], "command");
  const CommandSpec& spec = command_spec(cfg.command);
  if (j.contains("family")) cfg.family = read_text(j["family"], "family");
  if (j.contains("chart")) cfg.chart = read_text(j["chart"], "chart");
  if (j.contains("numeric")) {
    const json& n = j["numeric"];
    if (!n.is_object()) throw UsageError("'numeric' must be an object");
    reject_unknown(n, {"quadrature_tol", "ode_steps", "newton_tol"}, "numeric.");
    if (n.contains("quadrature_tol"))
      cfg.numeric.quadrature_tol = read_real(n["quadrature_tol"], "numeric.quadrature_tol");
    if (n.contains("ode_steps")) {
      const long long s = read_integer(n["ode_steps"], "numeric.ode_steps");
      if (s < 16 || s > 100000000) throw UsageError("numeric.ode_steps must be in [16, 1e8]");
      cfg.numeric.ode_steps = static_cast<int>(s);
    }
    if (n.contains("newton_tol"))
      cfg.numeric.newton_tol = read_real(n["newton_tol"], "numeric.newton_tol");
  }
  if (!(cfg.numeric.quadrature_tol > 0.0) || !std::isfinite(cfg.numeric.quadrature_tol))
    throw UsageError("numeric.quadrature_tol must be positive");
  if (!(cfg.numeric.newton_tol > 0.0) || !std::isfinite(cfg.numeric.newton_tol))
    throw UsageError("numeric.newton_tol must be positive");
  if (j.contains("seed") && !j["seed"].is_null()) {
    const json& s = j["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<long long>() < 0))
      throw UsageError("'seed' must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    if (!o.is_object()) throw UsageError("'output' must be an object");
    reject_unknown(o, {"path", "format"}, "output.");
    if (o.contains("path")) cfg.output.path = read_text(o["path"], "output.path");
    if (o.contains("format")) cfg.output.format = read_text(o["format"], "output.format");
  }
  if (cfg.output.format != "json" && cfg.output.format != "csv")
    throw UsageError("output.format must be 'json' or 'csv'");
  if (j.contains("args")) {
    const json& a = j["args"];
    if (!a.is_object()) throw UsageError("'args' must be an object");
    for (auto it = a.begin(); it != a.end(); ++it) {
      const auto found = std::find_if(spec.args.begin(), spec.args.end(),
                                      [&](const ArgSpec& s) { return s.key == it.key(); });
      if (found == spec.args.end())
        throw UsageError("unknown argument 'args." + it.key() + "' for command '" +
                         cfg.command + "'");
      check_arg(*found, it.value());
    }
    cfg.args = a;
  }
  return cfg;
}

void check_required(const RunConfig& cfg) {
  const CommandSpec& spec = command_spec(cfg.command);
  if (spec.needs_family && cfg.family.empty())
    throw UsageError("missing required option --family");
  for (const ArgSpec& a : spec.args) {
    if (!a.required || cfg.args.contains(a.key)) continue;
    std::string flag = a.key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    throw UsageError("missing required option " +
                     (a.key == "op" ? std::string("operation") : "--" + flag));
  }
}

json merge_json(json base, const json& overlay) {
  if (!base.is_object() || !overlay.is_object()) return overlay;
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object())
      base[it.key()] = merge_json(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
  return base;
}

}  // namespace raogeo::cli
