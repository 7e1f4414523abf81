#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "raogeo/divergences.hpp"
#include "raogeo/error.hpp"
#include "raogeo/estimation.hpp"
#include "raogeo/expfam.hpp"
#include "raogeo/fisher.hpp"
#include "raogeo/geodesics.hpp"
#include "raogeo/linalg.hpp"
#include "raogeo_cli/cli.hpp"
#include "raogeo_cli/json_out.hpp"
#include "raogeo_cli/props.hpp"

namespace raogeo::cli {

namespace {

using nlohmann::json;

json vec_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

json mat_json(const Matrix& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Vector arg_vector(const RunConfig& cfg, const std::string& key) {
  if (!cfg.args.contains(key)) throw UsageError("missing required option --" + key);
  const json& a = cfg.args[key];
  Vector v(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = read_real(a[i], key);
  return v;
}

std::string arg_text(RunConfig& cfg, const std::string& key, const std::string& fallback) {
  if (!cfg.args.contains(key)) cfg.args[key] = fallback;
  return cfg.args[key].get<std::string>();
}

long long arg_integer(RunConfig& cfg, const std::string& key, long long fallback) {
  if (!cfg.args.contains(key)) cfg.args[key] = fallback;
  const json& v = cfg.args[key];
  return v.is_number_integer() ? v.get<long long>() : static_cast<long long>(v.get<double>());
}

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw UsageError("this command samples; give --seed or set RAOGEO_SEED");
  return *cfg.seed;
}

QuadratureOptions quadrature(const RunConfig& cfg) {
  QuadratureOptions q;
  q.tol = cfg.numeric.quadrature_tol;
  return q;
}

NewtonOptions newton(const RunConfig& cfg) {
  NewtonOptions n;
  n.tol = cfg.numeric.newton_tol;
  return n;
}

FamilyPtr resolve_family(RunConfig& cfg) {
  FamilyPtr family = make_family(cfg.family);
  if (cfg.chart.empty()) cfg.chart = family->base_chart();
  family->chart(cfg.chart);
  return family;
}

ParamPoint point(const Family& family, const RunConfig& cfg, const std::string& key) {
  ParamPoint p{arg_vector(cfg, key), cfg.chart};
  family.validate(p);
  return p;
}

void require_table_format(const RunConfig& cfg) {
  if (cfg.output.format == "csv")
    throw UsageError("CSV output is available only for crlb-sim and geodesic");
}

std::string number_text(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw UsageError("failed writing '" + path + "'");
}

CommandOutput run_fisher(RunConfig& cfg) {
  require_table_format(cfg);
  const FamilyPtr family = resolve_family(cfg);
  const ParamPoint theta = point(*family, cfg, "theta");
  const FisherMethod method = parse_fisher_method(arg_text(cfg, "method", "analytic"));
  FisherOptions fo;
  fo.quadrature = quadrature(cfg);
  if (method == FisherMethod::MonteCarlo) {
    fo.mc_samples = arg_integer(cfg, "mc_samples", fo.mc_samples);
    fo.mc_seed = require_seed(cfg);
  }
  const MetricTensor m = fisher_information(*family, theta, method, fo);
  CommandOutput out;
  out.result = {{"family", family->name()},
                {"chart", cfg.chart},
                {"theta", vec_json(theta.coords)},
                {"method", m.method()},
                {"matrix", mat_json(m.matrix())}};
  out.residuals = {{"quadrature_error", number(m.residual())},
                   {"asymmetry", number(max_asymmetry(m.matrix()))}};
  return out;
}

CommandOutput run_crlb(RunConfig& cfg) {
  const FamilyPtr family = resolve_family(cfg);
  const ParamPoint theta = point(*family, cfg, "theta");
  const std::string name = arg_text(cfg, "estimator", "");
  const long n = static_cast<long>(arg_integer(cfg, "n", 0));
  const long replicates = static_cast<long>(arg_integer(cfg, "replicates", 0));
  const std::uint64_t seed = require_seed(cfg);
  const EstimatorSpec est = make_estimator(*family, name, theta);
  MonteCarloOptions mo;
  mo.threads = static_cast<unsigned>(std::max(0LL, arg_integer(cfg, "threads", 0)));
  const bool want_table = cfg.output.format == "csv" || cfg.args.contains("estimates");
  mo.keep_estimates = want_table;
  const EstimatorReport r = monte_carlo_report(*family, theta, est, n, replicates, seed, mo);

  CommandOutput out;
  out.result = {{"estimator", r.estimator},
                {"family", r.family},
                {"chart", r.theta_star.chart},
                {"theta_star", vec_json(r.theta_star.coords)},
                {"components", r.components},
                {"n", r.n},
                {"replicates", r.replicates},
                {"seed", r.seed},
                {"empirical_mean", vec_json(r.empirical_mean)},
                {"empirical_cov", mat_json(r.empirical_cov)},
                {"crlb_matrix", mat_json(r.crlb_matrix)},
                {"loewner_slack", number(r.loewner_slack)},
                {"loewner_slack_se", number(r.loewner_slack_se)},
                {"bias_norm", number(r.bias_norm)},
                {"efficiency", vec_json(r.efficiency)},
                {"variance_se", vec_json(r.variance_se)},
                {"unbiased_claim", r.unbiased_claim},
                {"regularity", r.regularity}};
  out.residuals = {{"loewner_slack_se", number(r.loewner_slack_se)},
                   {"bias_norm", number(r.bias_norm)}};
  if (want_table) {
    std::ostringstream t;
    t << "replicate";
    for (std::size_t j = 0; j < r.components.size(); ++j) t << ",estimate_" << r.components[j];
    t << '\n';
    for (std::size_t i = 0; i < r.estimates.size(); ++i) {
      t << i;
      for (int j = 0; j < r.estimates[i].size(); ++j) t << ',' << number_text(r.estimates[i](j));
      t << '\n';
    }
    out.table = t.str();
    if (cfg.args.contains("estimates")) {
      write_text_file(cfg.args["estimates"].get<std::string>(), out.table);
      out.result["estimates_csv"] = cfg.args["estimates"];
    }
  }
  return out;
}

// "alpha:A" with any finite A.
double parse_alpha(const std::string& kind) {
  const std::string tail = kind.substr(6);
  std::size_t used = 0;
  double a = NAN;
  try {
    a = std::stod(tail, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != tail.size() || !std::isfinite(a))
    throw UsageError("malformed divergence kind '" + kind + "'");
  return a;
}

DiscreteDist read_dist(const std::string& path) {
  return DiscreteDist(read_csv_numbers(path, false));
}

CommandOutput run_div(RunConfig& cfg) {
  require_table_format(cfg);
  const std::string kind = arg_text(cfg, "kind", "");
  CommandOutput out;
  out.result["kind"] = kind;
  if (cfg.args.contains("discrete")) {
    const json& files = cfg.args["discrete"];
    if (files.size() != 2) throw UsageError("--discrete takes two CSV files");
    const DiscreteDist p = read_dist(files[0].get<std::string>());
    const DiscreteDist q = read_dist(files[1].get<std::string>());
    if (p.size() != q.size()) throw UsageError("discrete distributions differ in size");
    double v = 0.0;
    if (kind == "kl")
      v = kl(p, q);
    else if (kind == "rkl")
      v = reverse_kl(p, q);
    else if (kind == "hellinger")
      v = hellinger_sq(p, q);
    else if (kind == "bhattacharyya")
      v = bhattacharyya(p, q);
    else if (kind.rfind("alpha:", 0) == 0)
      v = alpha_divergence(parse_alpha(kind), p, q);
    else if (kind.rfind("f:", 0) == 0)
      v = f_divergence(make_generator(kind.substr(2)), p, q);
    else
      throw UsageError("unknown divergence kind '" + kind + "'");
    out.result["value"] = number(v);
    out.result["method"] = "sum";
    out.residuals["quadrature_error"] = 0.0;
    return out;
  }
  if (cfg.family.empty()) throw UsageError("missing required option --family (or --discrete)");
  const FamilyPtr family = resolve_family(cfg);
  const ParamPoint p = point(*family, cfg, "theta1");
  const ParamPoint q = point(*family, cfg, "theta2");
  const QuadratureOptions qo = quadrature(cfg);
  DivergenceValue d;
  if (kind == "kl")
    d = kl(*family, p, q, qo);
  else if (kind == "rkl")
    d = reverse_kl(*family, p, q, qo);
  else if (kind == "hellinger")
    d = hellinger_sq(*family, p, q, qo);
  else if (kind == "bhattacharyya")
    d = bhattacharyya(*family, p, q, qo);
  else if (kind.rfind("alpha:", 0) == 0)
    d = alpha_divergence(parse_alpha(kind), *family, p, q, qo);
  else if (kind.rfind("f:", 0) == 0)
    d = f_divergence(make_generator(kind.substr(2)), *family, p, q, qo);
  else
    throw UsageError("unknown divergence kind '" + kind + "'");
  out.result["family"] = family->name();
  out.result["chart"] = cfg.chart;
  out.result["value"] = number(d.value);
  out.result["method"] = d.method;
  out.residuals["quadrature_error"] = number(d.residual);
  return out;
}

CommandOutput run_expfam(RunConfig& cfg) {
  require_table_format(cfg);
  const ExpFamPtr spec = make_expfam(cfg.family);
  if (cfg.chart.empty()) cfg.chart = "natural";
  if (cfg.chart != "natural")
    throw UsageError("expfam operations work in the natural chart");
  const std::string op = arg_text(cfg, "op", "");
  const NewtonOptions no = newton(cfg);
  CommandOutput out;
  out.result["family"] = spec->name();
  out.result["op"] = op;
  if (op == "to-natural") {
    const Vector eta = arg_vector(cfg, "eta");
    const Vector theta = to_natural(*spec, eta, no);
    out.result["theta"] = vec_json(theta);
    out.residuals["gradient_residual"] = number((to_expectation(*spec, theta) - eta).norm());
  } else if (op == "to-expectation") {
    const Vector theta = arg_vector(cfg, "theta");
    out.result["eta"] = vec_json(to_expectation(*spec, theta));
  } else if (op == "conjugate") {
    const Vector eta = arg_vector(cfg, "eta");
    const Vector theta = to_natural(*spec, eta, no);
    out.result["value"] = number(eta.dot(theta) - spec->cumulant(theta));
    out.result["theta"] = vec_json(theta);
    out.residuals["gradient_residual"] = number((to_expectation(*spec, theta) - eta).norm());
  } else if (op == "bregman") {
    const Vector t1 = arg_vector(cfg, "theta1");
    const Vector t2 = arg_vector(cfg, "theta2");
    const Vector e2 = to_expectation(*spec, t2);
    const Vector e1 = to_expectation(*spec, t1);
    const double primal = bregman(*spec, t1, t2);
    const double mixed = bregman_mixed(*spec, t1, e2, no);
    const double dual = bregman_dual(*spec, e2, e1, no);
    out.result["value"] = number(primal);
    out.result["primal"] = number(primal);
    out.result["mixed"] = number(mixed);
    out.result["dual"] = number(dual);
    out.residuals["form_spread"] =
        number(std::max({primal, mixed, dual}) - std::min({primal, mixed, dual}));
  } else if (op == "mle") {
    if (!cfg.args.contains("data")) throw UsageError("missing required option --data");
    const std::vector<double> xs = read_csv_numbers(cfg.args["data"].get<std::string>(), true);
    const DualPoint d = mle(*spec, xs, no);
    out.result["theta"] = vec_json(d.theta);
    out.result["eta"] = vec_json(d.eta);
    out.result["n"] = xs.size();
    out.residuals["gradient_residual"] = number((to_expectation(*spec, d.theta) - d.eta).norm());
  } else {
    throw UsageError("unknown expfam operation '" + op +
                     "' (known: to-natural, to-expectation, conjugate, bregman, mle)");
  }
  return out;
}

ConnectOptions connect_options(const RunConfig& cfg) {
  ConnectOptions co;
  co.steps = cfg.numeric.ode_steps;
  return co;
}

CommandOutput run_rao(RunConfig& cfg) {
  require_table_format(cfg);
  const FamilyPtr family = resolve_family(cfg);
  const ParamPoint a = point(*family, cfg, "theta1");
  const ParamPoint b = point(*family, cfg, "theta2");
  const std::string method = arg_text(cfg, "method", "ode");
  CommandOutput out;
  out.result["family"] = family->name();
  out.result["chart"] = cfg.chart;
  out.result["method"] = method;
  if (method == "ode") {
    const GeodesicPath p = geodesic_connect(*family, a, b, connect_options(cfg));
    out.result["distance"] = number(p.length);
    out.residuals = {{"endpoint_residual", number(p.endpoint_residual)},
                     {"speed_variation", number(p.speed_variation)}};
  } else if (method == "closed") {
    out.result["distance"] = number(rao_distance_closed_form(*family, a, b));
  } else {
    throw UsageError("unknown rao method '" + method + "' (known: ode, closed)");
  }
  return out;
}

CommandOutput run_geodesic(RunConfig& cfg) {
  const FamilyPtr family = resolve_family(cfg);
  const ParamPoint a = point(*family, cfg, "theta1");
  const ParamPoint b = point(*family, cfg, "theta2");
  const GeodesicPath p = geodesic_connect(*family, a, b, connect_options(cfg));
  CommandOutput out;
  std::ostringstream t;
  t << "t";
  for (int i = 0; i < a.dim(); ++i) t << ",theta_" << i;
  t << ",speed\n";
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    t << number_text(p.nodes[i].t);
    for (int j = 0; j < a.dim(); ++j) t << ',' << number_text(p.nodes[i].theta(j));
    t << ',' << number_text(p.speeds[i]) << '\n';
  }
  out.table = t.str();
  out.result = {{"family", family->name()},
                {"chart", cfg.chart},
                {"length", number(p.length)},
                {"nodes", p.nodes.size()},
                {"newton_iterations", p.newton_iterations},
                {"kind", p.kind}};
  if (cfg.args.contains("trace")) {
    write_text_file(cfg.args["trace"].get<std::string>(), out.table);
    out.result["trace"] = cfg.args["trace"];
  }
  out.residuals = {{"endpoint_residual", number(p.endpoint_residual)},
                   {"ode_residual", number(p.ode_residual)},
                   {"speed_variation", number(p.speed_variation)}};
  return out;
}

CommandOutput run_props(RunConfig& cfg) {
  require_table_format(cfg);
  const std::string suite = arg_text(cfg, "suite", "");
  const long trials = static_cast<long>(arg_integer(cfg, "trials", 100));
  if (!cfg.seed) cfg.seed = 0;
  const SuiteReport report = run_suite(suite, trials, *cfg.seed, cfg.numeric);
  CommandOutput out;
  out.result = to_json(report);
  for (const PropertyReport& p : report.properties) out.residuals[p.name] = number(p.worst);
  out.failed = !report.passed;
  return out;
}

}  // namespace

CommandOutput execute(RunConfig& cfg) {
  check_required(cfg);
  if (cfg.command == "fisher") return run_fisher(cfg);
  if (cfg.command == "crlb-sim") return run_crlb(cfg);
  if (cfg.command == "div") return run_div(cfg);
  if (cfg.command == "expfam") return run_expfam(cfg);
  if (cfg.command == "rao") return run_rao(cfg);
  if (cfg.command == "geodesic") return run_geodesic(cfg);
  if (cfg.command == "props") return run_props(cfg);
  throw UsageError("unknown command '" + cfg.command + "'");
}

std::vector<double> read_csv_numbers(const std::string& path, bool first_column_only) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read '" + path + "'");
  std::vector<double> out;
  std::string line;
  bool first_row = true;
  long line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    std::istringstream fields(line);
    std::string field;
    std::vector<double> row;
    bool numeric = true;
    while (fields >> field) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
      if (first_column_only) break;
    }
    if (row.empty() && numeric) continue;
    if (!numeric) {
      if (first_row && out.empty()) {
        first_row = false;
        continue;
      }
      throw UsageError("non-numeric field in '" + path + "' line " + std::to_string(line_no));
    }
    first_row = false;
    out.insert(out.end(), row.begin(), row.end());
  }
  if (out.empty()) throw UsageError("'" + path + "' contains no numbers");
  return out;
}

}  // namespace raogeo::cli
