#include "raogeo_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI/CLI.hpp>

#include "raogeo/error.hpp"
#include "raogeo_cli/json_out.hpp"

#ifndef RAOGEO_VERSION
#define RAOGEO_VERSION "0.0.0"
#endif

namespace raogeo::cli {

namespace {

using nlohmann::json;

struct RawOption {
  json::json_pointer target;
  ArgKind kind;
  std::vector<std::string> values;
  CLI::Option* option = nullptr;
};

double parse_real(const std::string& s, const std::string& flag) {
  if (s == "inf" || s == "+inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw UsageError(flag + ": '" + s + "' is not a number");
  return v;
}

long long parse_integer(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw UsageError(flag + ": '" + s + "' is not an integer");
  return v;
}

std::uint64_t parse_seed(const std::string& s, const std::string& source) {
  std::size_t used = 0;
  unsigned long long v = 0;
  const bool digits = !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
  try {
    if (digits) v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (!digits || used != s.size())
    throw UsageError(source + ": '" + s + "' is not a non-negative integer seed");
  return v;
}

json convert(const RawOption& raw) {
  const std::string flag = raw.option->get_name();
  switch (raw.kind) {
    case ArgKind::Real:
      return number(parse_real(raw.values.front(), flag));
    case ArgKind::Integer:
      return parse_integer(raw.values.front(), flag);
    case ArgKind::Text:
      return raw.values.front();
    case ArgKind::Reals: {
      json a = json::array();
      for (const auto& v : raw.values) a.push_back(number(parse_real(v, flag)));
      return a;
    }
    case ArgKind::Texts:
      return raw.values;
  }
  return nullptr;
}

std::string flag_of(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

CLI::Option* add_raw(CLI::App& app, std::deque<RawOption>& store, const std::string& names,
                     const std::string& pointer, ArgKind kind, const std::string& help) {
  store.push_back(RawOption{json::json_pointer(pointer), kind, {}, nullptr});
  RawOption& raw = store.back();
  raw.option = app.add_option(names, raw.values, help);
  if (kind == ArgKind::Reals || kind == ArgKind::Texts)
    raw.option->expected(1, CLI::detail::expected_max_vector_size);
  else
    raw.option->expected(1);
  return raw.option;
}

json read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read configuration '" + path + "'");
  try {
    json j = json::parse(f);
    if (!j.is_object()) throw UsageError("configuration '" + path + "' is not a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw UsageError("configuration '" + path + "' is not valid JSON: " + e.what());
  }
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.output.path);
  if (!f) throw UsageError("cannot open '" + cfg.output.path + "' for writing");
  f << text;
}

json versions() { return {{"artifact", RAOGEO_VERSION}, {"schema", kSchemaVersion}}; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Fisher-Rao information geometry toolkit", "raogeo"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.set_version_flag("--version", RAOGEO_VERSION);

  std::deque<RawOption> globals;
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration merged under explicit flags");
  add_raw(app, globals, "--family", "/family", ArgKind::Text,
          "gaussian1d | poisson | discrete:m (expfam also: selfdual:d)");
  add_raw(app, globals, "--chart", "/chart", ArgKind::Text, "coordinate chart");
  add_raw(app, globals, "--seed", "/seed", ArgKind::Text, "random seed (fallback: RAOGEO_SEED)");
  add_raw(app, globals, "--quadrature-tol", "/numeric/quadrature_tol", ArgKind::Real,
          "relative quadrature tolerance (default 1e-10)");
  add_raw(app, globals, "--ode-steps,--steps", "/numeric/ode_steps", ArgKind::Integer,
          "RK4 steps for geodesics (default 1000)");
  add_raw(app, globals, "--newton-tol", "/numeric/newton_tol", ArgKind::Real,
          "Newton residual tolerance on grad F (default 1e-12)");
  add_raw(app, globals, "--out", "/output/path", ArgKind::Text, "write output to a file");
  add_raw(app, globals, "--format", "/output/format", ArgKind::Text, "json | csv");

  std::deque<RawOption> locals;
  std::vector<std::pair<CLI::App*, std::vector<RawOption*>>> subs;
  for (const CommandSpec& spec : command_specs()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    sub->fallthrough();
    std::vector<RawOption*> mine;
    for (const ArgSpec& a : spec.args) {
      const std::string names = a.key == "op" ? std::string("op") : flag_of(a.key);
      add_raw(*sub, locals, names, "/args/" + a.key, a.kind, a.help);
      mine.push_back(&locals.back());
    }
    subs.emplace_back(sub, std::move(mine));
  }

  std::optional<RunConfig> resolved;
  try {
    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        app.exit(e, out, err);
        return kExitOk;
      }
      err << "raogeo: error: " << e.what() << '\n';
      return kExitUsage;
    }

    json overlay = json::object();
    for (const RawOption& raw : globals) {
      if (raw.option->count() == 0) continue;
      if (raw.target.to_string() == "/seed")
        overlay["seed"] = parse_seed(raw.values.front(), "--seed");
      else
        overlay[raw.target] = convert(raw);
    }
    for (const auto& [sub, options] : subs) {
      if (!sub->parsed()) continue;
      overlay["command"] = sub->get_name();
      for (const RawOption* raw : options)
        if (raw->option->count() > 0) overlay[raw->target] = convert(*raw);
    }

    json merged = config_path.empty() ? json::object() : read_config_file(config_path);
    if (merged.contains("command") && overlay.contains("command") &&
        merged["command"] != overlay["command"])
      merged.erase("args");
    merged = merge_json(merged, overlay);
    if (!merged.contains("seed") || merged["seed"].is_null()) {
      if (const char* env = std::getenv("RAOGEO_SEED"); env && *env)
        merged["seed"] = parse_seed(env, "RAOGEO_SEED");
    }
    if (!merged.contains("command")) {
      err << app.help();
      throw UsageError("no command given");
    }

    RunConfig cfg = config_from_json(merged);
    resolved = cfg;
    CommandOutput result = execute(cfg);
    resolved = cfg;

    std::string text;
    if (cfg.output.format == "csv") {
      text = result.table;
    } else {
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
      json envelope = {{"config_echo", to_json(cfg)},
                       {"result", result.result},
                       {"residuals", result.residuals},
                       {"versions", versions()},
                       {"wall_time_ms", ms}};
      text = dump_json(envelope);
    }
    emit(cfg, text, out);
    if (result.failed) {
      err << "raogeo: property suite reported failures\n";
      return kExitNumeric;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "raogeo: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "raogeo: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SupportError& e) {
    err << "raogeo: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "raogeo: numeric failure: " << e.what() << '\n';
    json error = {{"type", "numeric"}, {"message", e.what()}};
    if (const auto* n = dynamic_cast<const NumericError*>(&e))
      error["residual"] = number(n->residual());
    if (const auto* r = dynamic_cast<const ReplicateFailure*>(&e))
      error["replicates"] = r->indices();
    json envelope = {{"config_echo", resolved ? to_json(*resolved) : json(nullptr)},
                     {"error", error},
                     {"versions", versions()}};
    if (!resolved || resolved->output.format == "json") {
      try {
        emit(resolved ? *resolved : RunConfig{}, dump_json(envelope), out);
      } catch (const std::exception&) {
        out << dump_json(envelope);
      }
    }
    return kExitNumeric;
  }
}

}  // namespace raogeo::cli
