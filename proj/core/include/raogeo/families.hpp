#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raogeo/quadrature.hpp"
#include "raogeo/rng.hpp"
#include "raogeo/types.hpp"

namespace raogeo {

/// A coordinate chart on the parameter space, expressed relative to the
/// family's base chart.
struct Chart {
  std::string name;
  std::function<Vector(const Vector&)> to_base;
  std::function<Vector(const Vector&)> from_base;
  /// d(base coords) / d(chart coords), evaluated at chart coords.
  std::function<Matrix(const Vector&)> jacobian;
  std::function<bool(const Vector&)> in_domain;
};

/// Region over which expectations under p_theta are evaluated.
///
/// Continuous families: the interval [lo, hi] holds all but ~1e-14 of the
/// mass. Discrete families: the integers lo..hi, truncated once the tail
/// bound drops below 1e-14.
struct SupportWindow {
  bool discrete = false;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breakpoints;
};

/// A parametric family {p_theta(x)} on a one-dimensional sample space.
///
/// Families are immutable after construction and safe to share between
/// threads. Every operation takes a ParamPoint in any registered chart; the
/// family converts to its base chart internally.
///
/// Regularity (theta-free support, differentiation under the integral sign)
/// is asserted for the built-ins, not checked.
class Family {
 public:
  virtual ~Family() = default;

  const std::string& name() const { return name_; }
  int param_dim() const { return dim_; }
  int sample_dim() const { return 1; }
  virtual bool is_discrete() const = 0;
  virtual bool in_support(double x) const = 0;

  const std::string& base_chart() const { return base_chart_; }
  std::vector<std::string> chart_names() const;
  bool has_chart(const std::string& chart) const;
  /// Throws UsageError for an unregistered chart.
  const Chart& chart(const std::string& chart) const;

  /// Throws UsageError (chart, dimension) or DomainError (outside domain).
  void validate(const ParamPoint& theta) const;
  bool in_domain(const ParamPoint& theta) const;

  Vector base_coords(const ParamPoint& theta) const;
  /// d(base) / d(theta.chart) at theta.
  Matrix jacobian_to_base(const ParamPoint& theta) const;

  double log_density(const ParamPoint& theta, double x) const;
  double density(const ParamPoint& theta, double x) const;
  /// Gradient of log p_theta(x) in theta's chart (analytic).
  Vector score(const ParamPoint& theta, double x) const;
  /// Closed-form Fisher information in theta's chart.
  Matrix fisher_closed_form(const ParamPoint& theta) const;
  double cdf(const ParamPoint& theta, double x) const;
  SupportWindow window(const ParamPoint& theta) const;
  /// Appends `out.size()` draws to `out`.
  void draw(const ParamPoint& theta, Rng& rng, std::span<double> out) const;

  /// Christoffel symbols of the first kind, gamma[k](i, j), when a closed
  /// form exists for theta's chart.
  virtual std::optional<std::vector<Matrix>> closed_form_christoffel(
      const ParamPoint& theta) const;

 protected:
  Family(std::string name, int dim, std::string base_chart);
  void add_chart(Chart chart);
  void add_identity_chart(const std::string& name);

  virtual bool in_base_domain(const Vector& base) const = 0;
  virtual double log_density_base(const Vector& base, double x) const = 0;
  virtual Vector score_base(const Vector& base, double x) const = 0;
  virtual Matrix fisher_base(const Vector& base) const = 0;
  virtual double cdf_base(const Vector& base, double x) const = 0;
  virtual SupportWindow window_base(const Vector& base) const = 0;
  virtual void draw_base(const Vector& base, Rng& rng,
                         std::span<double> out) const = 0;

 private:
  void check_support(double x) const;

  std::string name_;
  int dim_;
  std::string base_chart_;
  std::vector<Chart> charts_;
};

using FamilyPtr = std::shared_ptr<const Family>;

/// Univariate normal N(mu, sigma^2). Base chart "mu-sigma"; also
/// "mu-sigmasq", "natural" (mu/sigma^2, -1/(2 sigma^2)) and "expectation"
/// (E[x], E[x^2]).
FamilyPtr make_gaussian1d();
/// Poisson(lambda). Base chart "lambda"; also "natural" (log lambda),
/// "expectation" (lambda) and "sqrt" (2 sqrt(lambda), a flat chart).
FamilyPtr make_poisson();
/// Categorical distribution on {1..m}, m >= 2. Base chart "probs" (the first
/// m-1 probabilities); also "expectation" (same coordinates) and "natural"
/// (log p_i / p_m). For m = 2 the flat chart "angle" (2 asin sqrt(p_1)) is
/// registered as well.
FamilyPtr make_discrete(int m);
/// Lookup by CLI name: "gaussian1d", "poisson", "discrete:m".
FamilyPtr make_family(const std::string& name);

struct SampleBatch {
  std::vector<double> points;
  std::string family;
  std::optional<ParamPoint> theta_star;
  std::uint64_t seed = 0;
};

/// Sum of log p_theta(x_i) over the batch.
double log_likelihood(const Family& family, const ParamPoint& theta,
                      const SampleBatch& batch);
double log_likelihood(const Family& family, const ParamPoint& theta,
                      std::span<const double> points);

/// n iid draws from p_theta; bit-identical for a fixed seed.
SampleBatch sample(const Family& family, const ParamPoint& theta,
                   std::uint64_t seed, long n);

ParamPoint reparameterize(const Family& family, const ParamPoint& theta,
                          const std::string& target_chart);

/// d(theta expressed in `source` chart) / d(theta in target chart), the
/// Jacobian consumed by pushforward_metric when moving a metric from the
/// source chart to the target chart.
Matrix chart_jacobian(const Family& family, const ParamPoint& theta_source,
                      const std::string& target_chart);

/// Integral (continuous) or sum (discrete) of f over the support window.
QuadratureResult integrate_support(const Family& family,
                                   const ParamPoint& theta,
                                   const std::function<Vector(double)>& f,
                                   int dim, const QuadratureOptions& opts = {});

/// E_theta[g(x)] evaluated by quadrature/summation.
QuadratureResult expectation(const Family& family, const ParamPoint& theta,
                             const std::function<Vector(double)>& g, int dim,
                             const QuadratureOptions& opts = {});

}  // namespace raogeo
