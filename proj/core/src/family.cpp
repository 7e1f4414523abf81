#include <algorithm>
#include <cmath>
#include <sstream>

#include "raogeo/error.hpp"
#include "raogeo/families.hpp"

namespace raogeo {

Family::Family(std::string name, int dim, std::string base_chart)
    : name_(std::move(name)), dim_(dim), base_chart_(std::move(base_chart)) {}

void Family::add_chart(Chart chart) { charts_.push_back(std::move(chart)); }

void Family::add_identity_chart(const std::string& chart_name) {
  const int d = dim_;
  add_chart(Chart{
      chart_name, [](const Vector& c) { return c; },
      [](const Vector& b) { return b; },
      [d](const Vector&) { return Matrix::Identity(d, d); },
      [this](const Vector& c) { return in_base_domain(c); }});
}

std::vector<std::string> Family::chart_names() const {
  std::vector<std::string> names;
  for (const auto& c : charts_) names.push_back(c.name);
  return names;
}

bool Family::has_chart(const std::string& chart_name) const {
  return std::any_of(charts_.begin(), charts_.end(),
                     [&](const Chart& c) { return c.name == chart_name; });
}

const Chart& Family::chart(const std::string& chart_name) const {
  for (const auto& c : charts_)
    if (c.name == chart_name) return c;
  std::ostringstream msg;
  msg << "family '" << name_ << "' has no chart '" << chart_name
      << "' (known:";
  for (const auto& c : charts_) msg << ' ' << c.name;
  msg << ')';
  throw UsageError(msg.str());
}

bool Family::in_domain(const ParamPoint& theta) const {
  if (!has_chart(theta.chart) || theta.dim() != dim_) return false;
  if (!theta.coords.allFinite()) return false;
  return chart(theta.chart).in_domain(theta.coords);
}

void Family::validate(const ParamPoint& theta) const {
  const Chart& c = chart(theta.chart);
  if (theta.dim() != dim_) {
    std::ostringstream msg;
    msg << "family '" << name_ << "' expects " << dim_
        << " parameter coordinates, got " << theta.dim();
    throw UsageError(msg.str());
  }
  if (!theta.coords.allFinite() || !c.in_domain(theta.coords)) {
    std::ostringstream msg;
    msg << "parameter (" << theta.coords.transpose() << ") is outside the "
        << name_ << " domain in chart '" << theta.chart << "'";
    throw DomainError(msg.str());
  }
}

Vector Family::base_coords(const ParamPoint& theta) const {
  validate(theta);
  return chart(theta.chart).to_base(theta.coords);
}

Matrix Family::jacobian_to_base(const ParamPoint& theta) const {
  validate(theta);
  return chart(theta.chart).jacobian(theta.coords);
}

void Family::check_support(double x) const {
  if (!std::isfinite(x) || !in_support(x)) {
    std::ostringstream msg;
    msg << "sample point " << x << " is outside the support of " << name_;
    throw SupportError(msg.str());
  }
}

double Family::log_density(const ParamPoint& theta, double x) const {
  check_support(x);
  return log_density_base(base_coords(theta), x);
}

double Family::density(const ParamPoint& theta, double x) const {
  return std::exp(log_density(theta, x));
}

Vector Family::score(const ParamPoint& theta, double x) const {
  check_support(x);
  const Vector base = base_coords(theta);
  const Matrix j = chart(theta.chart).jacobian(theta.coords);
  return j.transpose() * score_base(base, x);
}

Matrix Family::fisher_closed_form(const ParamPoint& theta) const {
  const Vector base = base_coords(theta);
  const Matrix j = chart(theta.chart).jacobian(theta.coords);
  const Matrix m = j.transpose() * fisher_base(base) * j;
  return 0.5 * (m + m.transpose());
}

double Family::cdf(const ParamPoint& theta, double x) const {
  return cdf_base(base_coords(theta), x);
}

SupportWindow Family::window(const ParamPoint& theta) const {
  return window_base(base_coords(theta));
}

void Family::draw(const ParamPoint& theta, Rng& rng,
                  std::span<double> out) const {
  draw_base(base_coords(theta), rng, out);
}

std::optional<std::vector<Matrix>> Family::closed_form_christoffel(
    const ParamPoint&) const {
  return std::nullopt;
}

double log_likelihood(const Family& family, const ParamPoint& theta,
                      std::span<const double> points) {
  family.validate(theta);
  double total = 0.0;
  for (double x : points) total += family.log_density(theta, x);
  return total;
}

double log_likelihood(const Family& family, const ParamPoint& theta,
                      const SampleBatch& batch) {
  return log_likelihood(family, theta, std::span<const double>(batch.points));
}

SampleBatch sample(const Family& family, const ParamPoint& theta,
                   std::uint64_t seed, long n) {
  if (n < 1) throw UsageError("sample size must be at least 1");
  family.validate(theta);
  SampleBatch batch;
  batch.points.resize(static_cast<std::size_t>(n));
  batch.family = family.name();
  batch.theta_star = theta;
  batch.seed = seed;
  Rng rng(seed);
  family.draw(theta, rng, batch.points);
  return batch;
}

ParamPoint reparameterize(const Family& family, const ParamPoint& theta,
                          const std::string& target_chart) {
  const Chart& target = family.chart(target_chart);
  const Vector base = family.base_coords(theta);
  ParamPoint out{target.from_base(base), target_chart};
  if (!out.coords.allFinite() || !target.in_domain(out.coords)) {
    std::ostringstream msg;
    msg << "image of (" << theta.coords.transpose() << ") lies outside chart '"
        << target_chart << "'";
    throw DomainError(msg.str());
  }
  return out;
}

Matrix chart_jacobian(const Family& family, const ParamPoint& theta_source,
                      const std::string& target_chart) {
  const ParamPoint target = reparameterize(family, theta_source, target_chart);
  const Matrix src_to_base = family.jacobian_to_base(theta_source);
  const Matrix tgt_to_base = family.jacobian_to_base(target);
  // d(src)/d(tgt) = (d base / d src)^-1 (d base / d tgt)
  return src_to_base.partialPivLu().solve(tgt_to_base);
}

QuadratureResult integrate_support(const Family& family,
                                   const ParamPoint& theta,
                                   const std::function<Vector(double)>& f,
                                   int dim, const QuadratureOptions& opts) {
  const SupportWindow w = family.window(theta);
  if (w.discrete) {
    Vector total = Vector::Zero(dim);
    const long first = std::lround(w.lo);
    const long last = std::lround(w.hi);
    for (long k = first; k <= last; ++k) total += f(static_cast<double>(k));
    return QuadratureResult{total, 0.0, static_cast<int>(last - first + 1)};
  }
  return integrate(f, dim, w.lo, w.hi, opts, w.breakpoints);
}

QuadratureResult expectation(const Family& family, const ParamPoint& theta,
                             const std::function<Vector(double)>& g, int dim,
                             const QuadratureOptions& opts) {
  family.validate(theta);
  auto weighted = [&](double x) -> Vector {
    const double p = family.density(theta, x);
    if (p == 0.0) return Vector::Zero(dim);
    return p * g(x);
  };
  return integrate_support(family, theta, weighted, dim, opts);
}

}  // namespace raogeo
