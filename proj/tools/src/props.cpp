#include "raogeo_cli/props.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>

#include "raogeo/divergences.hpp"
#include "raogeo/error.hpp"
#include "raogeo/expfam.hpp"
#include "raogeo/geodesics.hpp"
#include "raogeo/rng.hpp"
#include "raogeo_cli/json_out.hpp"

namespace raogeo::cli {

namespace {

using nlohmann::json;

json to_json_vec(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

json to_json_vec(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::vector<double> random_simplex(Rng& rng, int m) {
  std::vector<double> p(static_cast<std::size_t>(m));
  double sum = 0.0;
  for (double& x : p) {
    x = -std::log(rng.uniform_open());
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

std::vector<std::vector<int>> random_partition(Rng& rng, int m) {
  const int k = uniform_int(rng, 1, m);
  std::vector<int> label(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) label[i] = i < k ? i : uniform_int(rng, 0, k - 1);
  for (int i = m - 1; i > 0; --i) std::swap(label[i], label[uniform_int(rng, 0, i)]);
  std::vector<std::vector<int>> bins(static_cast<std::size_t>(k));
  for (int i = 0; i < m; ++i) bins[label[i]].push_back(i);
  return bins;
}

// Gaussian in (mu, sigma) with mu in [-2, 2], sigma in [0.5, 2].
Vector random_gaussian(Rng& rng) {
  return make_vector({uniform(rng, -2.0, 2.0), uniform(rng, 0.5, 2.0)});
}

Vector gaussian_natural(const Vector& ms) {
  const double v = ms(1) * ms(1);
  return make_vector({ms(0) / v, -0.5 / v});
}

// One trial returns the checked quantity and a description of the input.
using Trial = std::function<std::pair<double, json>(Rng&)>;

struct Property {
  std::string name;
  double threshold;
  bool lower_bound;
  Trial trial;
};

PropertyReport run_property(const Property& prop, long trials, std::uint64_t seed,
                            std::uint64_t stream) {
  PropertyReport r;
  r.name = prop.name;
  r.trials = trials;
  r.threshold = prop.threshold;
  r.lower_bound = prop.lower_bound;
  r.worst = prop.lower_bound ? INFINITY : 0.0;
  if (trials == 0) r.worst = 0.0;
  Rng rng = Rng::for_stream(seed, stream);
  for (long t = 0; t < trials; ++t) {
    auto [value, input] = prop.trial(rng);
    const bool ok = prop.lower_bound ? value >= prop.threshold : value < prop.threshold;
    const bool worse = prop.lower_bound ? !(value >= r.worst) : !(value <= r.worst);
    if (worse) r.worst = value;
    if (!ok && r.passed) {
      r.passed = false;
      r.counterexample = {{"trial", t}, {"value", number(value)}, {"input", input}};
    }
  }
  return r;
}

std::vector<Property> monotonicity_properties() {
  std::vector<Property> out;
  for (const FGenerator& gen : builtin_generators()) {
    out.push_back({"monotonicity/" + gen.name, -1e-12, true, [gen](Rng& rng) {
                     const int m = uniform_int(rng, 2, 8);
                     const std::vector<double> p = random_simplex(rng, m);
                     const std::vector<double> q = random_simplex(rng, m);
                     const auto bins = random_partition(rng, m);
                     const Partition part(bins, m);
                     const DiscreteDist dp(p), dq(q);
                     const double fine = f_divergence(gen, dp, dq);
                     const double coarse =
                         f_divergence(gen, coarse_grain(dp, part), coarse_grain(dq, part));
                     return std::pair{fine - coarse,
                                      json{{"p", to_json_vec(p)},
                                           {"q", to_json_vec(q)},
                                           {"bins", bins}}};
                   }});
  }
  return out;
}

std::vector<Property> invariance_properties(const NumericConfig& numeric) {
  const QuadratureOptions qo{numeric.quadrature_tol};
  const auto gaussian = make_gaussian1d();
  std::vector<Property> out;
  for (const std::string& gname : {std::string("kl"), std::string("hellinger")}) {
    for (const std::string& mname : {std::string("affine"), std::string("cubic")}) {
      out.push_back({"invariance/" + gname + "/" + mname, 1e-6, false, [=](Rng& rng) {
                       const FGenerator gen = make_generator(gname);
                       const ParamPoint p1{random_gaussian(rng), "mu-sigma"};
                       const ParamPoint p2{random_gaussian(rng), "mu-sigma"};
                       json input = {{"theta1", to_json_vec(p1.coords)},
                                     {"theta2", to_json_vec(p2.coords)}};
                       SampleSpaceMap map = cubic_map();
                       if (mname == "affine") {
                         const double a = (rng.uniform() < 0.5 ? -1.0 : 1.0) *
                                          uniform(rng, 0.5, 3.0);
                         const double b = uniform(rng, -2.0, 2.0);
                         map = affine_map(a, b);
                         input["map"] = {{"a", a}, {"b", b}};
                       }
                       const InvarianceCheck c =
                           pushforward_density_check(*gaussian, map, p1, p2, gen, qo);
                       return std::pair{c.residual, input};
                     }});
    }
  }
  return out;
}

struct ExpFamCase {
  ExpFamPtr spec;
  FamilyPtr family;
  std::function<Vector(Rng&)> draw_natural;
};

std::vector<ExpFamCase> expfam_cases() {
  return {
      {make_poisson_expfam(), make_poisson(),
       [](Rng& rng) { return make_vector({uniform(rng, -1.0, 2.5)}); }},
      {make_gaussian_expfam(), make_gaussian1d(),
       [](Rng& rng) { return gaussian_natural(random_gaussian(rng)); }},
  };
}

std::vector<Property> duality_properties(const NumericConfig& numeric) {
  const NewtonOptions no{numeric.newton_tol};
  const QuadratureOptions qo{numeric.quadrature_tol};
  std::vector<Property> out;
  for (const ExpFamCase& c : expfam_cases()) {
    const std::string fam = c.spec->name();
    out.push_back({"roundtrip/" + fam, 1e-8, false, [=](Rng& rng) {
                     const Vector th = c.draw_natural(rng);
                     const Vector back = to_natural(*c.spec, to_expectation(*c.spec, th), no);
                     const double err = (back - th).norm() / std::max(1.0, th.norm());
                     return std::pair{err, json{{"theta", to_json_vec(th)}}};
                   }});
    out.push_back({"hessian-inverse/" + fam, 1e-6, false, [=](Rng& rng) {
                     const Vector th = c.draw_natural(rng);
                     const Matrix h = c.spec->cumulant_hessian(th);
                     const Matrix hs = conjugate_hessian(*c.spec, to_expectation(*c.spec, th), no);
                     const double err =
                         (h * hs - Matrix::Identity(th.size(), th.size())).cwiseAbs().maxCoeff();
                     return std::pair{err, json{{"theta", to_json_vec(th)}}};
                   }});
    out.push_back({"bregman-forms/" + fam, 1e-8, false, [=](Rng& rng) {
                     const Vector t1 = c.draw_natural(rng);
                     const Vector t2 = c.draw_natural(rng);
                     const Vector e1 = to_expectation(*c.spec, t1);
                     const Vector e2 = to_expectation(*c.spec, t2);
                     const double primal = bregman(*c.spec, t2, t1);
                     const double mixed = bregman_mixed(*c.spec, t2, e1, no);
                     const double dual = bregman_dual(*c.spec, e1, e2, no);
                     const double spread = std::max({primal, mixed, dual}) -
                                           std::min({primal, mixed, dual});
                     return std::pair{spread, json{{"theta1", to_json_vec(t1)},
                                                   {"theta2", to_json_vec(t2)}}};
                   }});
    out.push_back({"kl-bregman/" + fam, 1e-8, false, [=](Rng& rng) {
                     const Vector t1 = c.draw_natural(rng);
                     const Vector t2 = c.draw_natural(rng);
                     const double direct = kl(*c.family, ParamPoint{t1, "natural"},
                                              ParamPoint{t2, "natural"}, qo)
                                               .value;
                     const double err = std::abs(direct - kl_via_bregman(*c.spec, t1, t2));
                     return std::pair{err, json{{"theta1", to_json_vec(t1)},
                                                {"theta2", to_json_vec(t2)}}};
                   }});
  }
  return out;
}

std::vector<Property> cosine_properties() {
  std::vector<Property> out;
  for (const ExpFamCase& c : expfam_cases()) {
    out.push_back({"cosine/" + c.spec->name(), 1e-8, false, [=](Rng& rng) {
                     const Vector p = c.draw_natural(rng);
                     const Vector q = c.draw_natural(rng);
                     const Vector r = c.draw_natural(rng);
                     return std::pair{cosine_residual(*c.spec, p, q, r),
                                      json{{"p", to_json_vec(p)},
                                           {"q", to_json_vec(q)},
                                           {"r", to_json_vec(r)}}};
                   }});
  }
  const ExpFamPtr gaussian = make_gaussian_expfam();
  out.push_back({"pythagorean/gaussian1d", 1e-8, false, [=](Rng& rng) {
                   const Vector q = gaussian_natural(random_gaussian(rng));
                   const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
                   const Vector u = make_vector({std::cos(angle), std::sin(angle)});
                   const Vector w = make_vector({-std::sin(angle), std::cos(angle)});
                   // Keep p inside theta_2 < 0 and r inside the variance range.
                   const double t = 0.25 * std::abs(q(1)) * uniform(rng, 0.1, 1.0);
                   double s = 0.05 * uniform(rng, 0.1, 1.0);
                   OrthogonalTriple tri;
                   for (int shrink = 0;; ++shrink, s *= 0.5) {
                     try {
                       tri = orthogonal_triple(*gaussian, q, u, w, t, s);
                       break;
                     } catch (const DomainError&) {
                       if (shrink == 20) throw;
                     }
                   }
                   const double residual =
                       std::abs(bregman(*gaussian, tri.p, tri.r) -
                                bregman(*gaussian, tri.p, tri.q) - bregman(*gaussian, tri.q, tri.r));
                   return std::pair{residual, json{{"q", to_json_vec(q)},
                                                   {"u", to_json_vec(u)},
                                                   {"w", to_json_vec(w)},
                                                   {"t", t},
                                                   {"s", s}}};
                 }});
  return out;
}

std::vector<Property> hellinger_properties(const NumericConfig& numeric) {
  const QuadratureOptions qo{numeric.quadrature_tol};
  const auto gaussian = make_gaussian1d();
  std::vector<Property> out;
  out.push_back({"hellinger-bhattacharyya/discrete", 1e-10, false, [](Rng& rng) {
                   const int m = uniform_int(rng, 2, 8);
                   const std::vector<double> p = random_simplex(rng, m);
                   const std::vector<double> q = random_simplex(rng, m);
                   const DiscreteDist dp(p), dq(q);
                   const double err =
                       std::abs(hellinger_sq(dp, dq) - (1.0 - std::exp(-bhattacharyya(dp, dq))));
                   return std::pair{err, json{{"p", to_json_vec(p)}, {"q", to_json_vec(q)}}};
                 }});
  out.push_back({"hellinger-bhattacharyya/gaussian1d", 1e-10, false, [=](Rng& rng) {
                   const ParamPoint p{random_gaussian(rng), "mu-sigma"};
                   const ParamPoint q{random_gaussian(rng), "mu-sigma"};
                   const double h2 = hellinger_sq(*gaussian, p, q, qo).value;
                   const double b = bhattacharyya(*gaussian, p, q, qo).value;
                   return std::pair{std::abs(h2 - (1.0 - std::exp(-b))),
                                    json{{"theta1", to_json_vec(p.coords)},
                                         {"theta2", to_json_vec(q.coords)}}};
                 }});
  return out;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"monotonicity", "invariance", "duality",
                                                 "cosine", "hellinger"};
  return names;
}

SuiteReport run_suite(const std::string& suite, long trials, std::uint64_t seed,
                      const NumericConfig& numeric) {
  if (trials < 0) throw UsageError("trials must be non-negative");
  std::vector<Property> props;
  if (suite == "monotonicity")
    props = monotonicity_properties();
  else if (suite == "invariance")
    props = invariance_properties(numeric);
  else if (suite == "duality")
    props = duality_properties(numeric);
  else if (suite == "cosine")
    props = cosine_properties();
  else if (suite == "hellinger")
    props = hellinger_properties(numeric);
  else
    throw UsageError("unknown property suite '" + suite +
                     "' (known: monotonicity, invariance, duality, cosine, hellinger)");
  SuiteReport report;
  report.suite = suite;
  report.trials = trials;
  report.seed = seed;
  for (std::size_t i = 0; i < props.size(); ++i) {
    report.properties.push_back(run_property(props[i], trials, seed, i));
    report.passed = report.passed && report.properties.back().passed;
  }
  return report;
}

json to_json(const SuiteReport& report) {
  json props = json::array();
  for (const PropertyReport& p : report.properties) {
    props.push_back({{"name", p.name},
                     {"trials", p.trials},
                     {"worst", number(p.worst)},
                     {"threshold", number(p.threshold)},
                     {"bound", p.lower_bound ? "worst >= threshold" : "worst < threshold"},
                     {"passed", p.passed},
                     {"counterexample", p.counterexample}});
  }
  json j = {{"suite", report.suite},
            {"trials", report.trials},
            {"seed", report.seed},
            {"passed", report.passed},
            {"properties", props}};
  if (report.trials == 0) j["marker"] = "0 trials";
  return j;
}

}  // namespace raogeo::cli
