#include "raogeo/expfam.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "raogeo/error.hpp"

namespace raogeo {

namespace {

constexpr double kTailMass = 1e-14;

bool is_integer(double x) { return std::isfinite(x) && std::floor(x) == x; }

std::string describe(const Vector& v) {
  std::ostringstream s;
  s.precision(17);
  s << '(' << v.transpose() << ')';
  return s.str();
}

class PoissonExpFam final : public ExpFamSpec {
 public:
  PoissonExpFam() : ExpFamSpec("poisson", 1) {}

  Vector sufficient_statistic(double x) const override { return make_vector({x}); }
  double carrier(double x) const override { return -std::lgamma(x + 1.0); }
  bool in_support(double x) const override { return is_integer(x) && x >= 0.0; }

  double cumulant(const Vector& th) const override { return std::exp(th(0)); }
  Vector cumulant_gradient(const Vector& th) const override {
    return make_vector({std::exp(th(0))});
  }
  Matrix cumulant_hessian(const Vector& th) const override {
    Matrix h(1, 1);
    h(0, 0) = std::exp(th(0));
    return h;
  }
  bool in_natural_domain(const Vector& th) const override {
    return std::isfinite(th(0)) && std::isfinite(std::exp(th(0)));
  }
  bool in_expectation_range(const Vector& eta) const override {
    return std::isfinite(eta(0)) && eta(0) > 0.0;
  }
  Vector newton_start() const override { return Vector::Zero(1); }

  double log_partition_numeric(const Vector& th,
                               const QuadratureOptions&) const override {
    // log-sum-exp of theta k - log k! around the mode.
    const double lambda = std::exp(th(0));
    const double mode = std::floor(lambda);
    auto term = [&](double k) { return th(0) * k - std::lgamma(k + 1.0); };
    const double peak = term(mode);
    double sum = 0.0;
    for (double k = mode; k >= 0.0; k -= 1.0) {
      const double v = std::exp(term(k) - peak);
      sum += v;
      if (v < kTailMass * 1e-2) break;
    }
    for (double k = mode + 1.0;; k += 1.0) {
      const double v = std::exp(term(k) - peak);
      sum += v;
      if (v < kTailMass * 1e-2) break;
    }
    return peak + std::log(sum);
  }
};

class GaussianExpFam final : public ExpFamSpec {
 public:
  GaussianExpFam() : ExpFamSpec("gaussian1d", 2) {}

  Vector sufficient_statistic(double x) const override { return make_vector({x, x * x}); }
  double carrier(double) const override { return 0.0; }
  bool in_support(double x) const override { return std::isfinite(x); }

  double cumulant(const Vector& th) const override {
    return -th(0) * th(0) / (4.0 * th(1)) + 0.5 * std::log(-std::numbers::pi / th(1));
  }
  Vector cumulant_gradient(const Vector& th) const override {
    const double t1 = th(0), t2 = th(1);
    return make_vector({-t1 / (2.0 * t2), t1 * t1 / (4.0 * t2 * t2) - 0.5 / t2});
  }
  Matrix cumulant_hessian(const Vector& th) const override {
    const double t1 = th(0), t2 = th(1);
    Matrix h(2, 2);
    h(0, 0) = -0.5 / t2;
    h(0, 1) = h(1, 0) = t1 / (2.0 * t2 * t2);
    h(1, 1) = -t1 * t1 / (2.0 * t2 * t2 * t2) + 0.5 / (t2 * t2);
    return h;
  }
  bool in_natural_domain(const Vector& th) const override {
    return th.allFinite() && th(1) < 0.0;
  }
  bool in_expectation_range(const Vector& eta) const override {
    return eta.allFinite() && eta(1) - eta(0) * eta(0) > 0.0;
  }
  Vector newton_start() const override { return make_vector({0.0, -0.5}); }

  double log_partition_numeric(const Vector& th,
                               const QuadratureOptions& opts) const override {
    const double var = -0.5 / th(1);
    const double mu = th(0) * var;
    const double sigma = std::sqrt(var);
    const double peak = th(0) * mu + th(1) * mu * mu;
    auto f = [&](double x) { return std::exp(th(0) * x + th(1) * x * x - peak); };
    std::vector<double> cuts;
    for (int k = -6; k <= 6; k += 2) cuts.push_back(mu + k * sigma);
    const auto r = integrate_scalar(f, mu - 12.0 * sigma, mu + 12.0 * sigma, opts, cuts);
    return peak + std::log(r.value);
  }
};

class CategoricalExpFam final : public ExpFamSpec {
 public:
  explicit CategoricalExpFam(int m)
      : ExpFamSpec("discrete:" + std::to_string(m), m - 1), m_(m) {}

  Vector sufficient_statistic(double x) const override {
    Vector t = Vector::Zero(m_ - 1);
    const int letter = static_cast<int>(x);
    if (letter < m_) t(letter - 1) = 1.0;
    return t;
  }
  double carrier(double) const override { return 0.0; }
  bool in_support(double x) const override {
    return is_integer(x) && x >= 1.0 && x <= static_cast<double>(m_);
  }

  double cumulant(const Vector& th) const override {
    const double shift = std::max(0.0, th.maxCoeff());
    return shift + std::log(std::exp(-shift) + (th.array() - shift).exp().sum());
  }
  Vector cumulant_gradient(const Vector& th) const override {
    const double shift = std::max(0.0, th.maxCoeff());
    const Vector e = (th.array() - shift).exp().matrix();
    return e / (std::exp(-shift) + e.sum());
  }
  Matrix cumulant_hessian(const Vector& th) const override {
    const Vector p = cumulant_gradient(th);
    Matrix h = -p * p.transpose();
    h.diagonal() += p;
    return h;
  }
  bool in_natural_domain(const Vector& th) const override { return th.allFinite(); }
  bool in_expectation_range(const Vector& eta) const override {
    return eta.allFinite() && (eta.array() > 0.0).all() && eta.sum() < 1.0;
  }
  Vector newton_start() const override { return Vector::Zero(m_ - 1); }

  double log_partition_numeric(const Vector& th,
                               const QuadratureOptions&) const override {
    double sum = 0.0;
    for (int x = 1; x <= m_; ++x)
      sum += std::exp(th.dot(sufficient_statistic(x)) + carrier(x));
    return std::log(sum);
  }

 private:
  int m_;
};

class SelfDualExpFam final : public ExpFamSpec {
 public:
  explicit SelfDualExpFam(int d) : ExpFamSpec("selfdual:" + std::to_string(d), d) {}

  Vector sufficient_statistic(double x) const override {
    require_scalar();
    return make_vector({x});
  }
  double carrier(double x) const override {
    require_scalar();
    return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  bool in_support(double x) const override { return std::isfinite(x); }

  double cumulant(const Vector& th) const override { return 0.5 * th.squaredNorm(); }
  Vector cumulant_gradient(const Vector& th) const override { return th; }
  Matrix cumulant_hessian(const Vector&) const override {
    return Matrix::Identity(dim(), dim());
  }
  bool in_natural_domain(const Vector& th) const override { return th.allFinite(); }
  bool in_expectation_range(const Vector& eta) const override { return eta.allFinite(); }
  Vector newton_start() const override { return Vector::Zero(dim()); }

  double log_partition_numeric(const Vector& th,
                               const QuadratureOptions& opts) const override {
    require_scalar();
    const double peak = 0.5 * th(0) * th(0) - 0.5 * std::log(2.0 * std::numbers::pi);
    auto f = [&](double x) {
      return std::exp(th(0) * x + carrier(x) - peak);
    };
    const auto r = integrate_scalar(f, th(0) - 12.0, th(0) + 12.0, opts);
    return peak + std::log(r.value);
  }

 private:
  void require_scalar() const {
    if (dim() != 1)
      throw UsageError("self-dual family has a sample space only in dimension 1");
  }
};

void require_natural(const ExpFamSpec& spec, const Vector& theta) {
  if (theta.size() != spec.dim())
    throw UsageError("natural parameter has the wrong dimension");
  if (!spec.in_natural_domain(theta))
    throw DomainError("natural parameter " + describe(theta) +
                      " is outside the natural domain of " + spec.name());
}

void require_expectation(const ExpFamSpec& spec, const Vector& eta) {
  if (eta.size() != spec.dim())
    throw UsageError("expectation parameter has the wrong dimension");
  if (!spec.in_expectation_range(eta))
    throw DomainError("expectation parameter " + describe(eta) +
                      " is outside the gradient range of " + spec.name());
}

// Newton inverse refined by undamped steps while they reduce the residual;
// the difference quotients in conjugate_hessian divide its error by the step.
Vector polished_natural(const ExpFamSpec& spec, const Vector& eta, const NewtonOptions& opts);

}  // namespace

ExpFamPtr make_poisson_expfam() { return std::make_shared<const PoissonExpFam>(); }
ExpFamPtr make_gaussian_expfam() { return std::make_shared<const GaussianExpFam>(); }

ExpFamPtr make_categorical_expfam(int m) {
  if (m < 2) throw UsageError("categorical family needs m >= 2 letters");
  return std::make_shared<const CategoricalExpFam>(m);
}

ExpFamPtr make_self_dual_expfam(int d) {
  if (d < 1) throw UsageError("self-dual family needs dimension >= 1");
  return std::make_shared<const SelfDualExpFam>(d);
}

ExpFamPtr make_expfam(const std::string& name) {
  if (name == "poisson") return make_poisson_expfam();
  if (name == "gaussian1d") return make_gaussian_expfam();
  auto suffix_int = [&](const std::string& prefix) {
    const std::string tail = name.substr(prefix.size());
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size())
      throw UsageError("malformed family name '" + name + "'");
    return v;
  };
  if (name.rfind("discrete:", 0) == 0) return make_categorical_expfam(suffix_int("discrete:"));
  if (name.rfind("selfdual:", 0) == 0) return make_self_dual_expfam(suffix_int("selfdual:"));
  throw UsageError("unknown exponential family '" + name +
                   "' (known: poisson, gaussian1d, discrete:m, selfdual:d)");
}

DualPoint make_dual_point(const ExpFamSpec& spec, const Vector& theta) {
  require_natural(spec, theta);
  return DualPoint{theta, spec.cumulant_gradient(theta)};
}

Vector to_expectation(const ExpFamSpec& spec, const Vector& theta) {
  require_natural(spec, theta);
  return spec.cumulant_gradient(theta);
}

Vector to_natural(const ExpFamSpec& spec, const Vector& eta,
                  const NewtonOptions& opts) {
  require_expectation(spec, eta);
  const double target = opts.tol * std::max(1.0, eta.norm());
  Vector theta = spec.newton_start();
  Vector r = spec.cumulant_gradient(theta) - eta;
  double rnorm = r.norm();
  for (int it = 0; it < opts.max_iter; ++it) {
    if (rnorm <= target) return theta;
    const Vector step = spec.cumulant_hessian(theta).ldlt().solve(r);
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      const Vector cand = theta - t * step;
      if (!spec.in_natural_domain(cand)) continue;
      const Vector rc = spec.cumulant_gradient(cand) - eta;
      const double rc_norm = rc.norm();
      if (std::isfinite(rc_norm) && rc_norm < (1.0 - 1e-4 * t) * rnorm) {
        theta = cand;
        r = rc;
        rnorm = rc_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (rnorm <= target) return theta;
  // Stalled within rounding of the target is still a solution.
  if (rnorm <= 64.0 * target) return theta;
  std::ostringstream msg;
  msg << "Newton inversion of the gradient did not converge for eta = "
      << describe(eta) << " (residual " << rnorm << ")";
  throw SolverError(msg.str(), rnorm);
}

double legendre_conjugate(const ExpFamSpec& spec, const Vector& eta,
                          const NewtonOptions& opts) {
  const Vector theta = to_natural(spec, eta, opts);
  return eta.dot(theta) - spec.cumulant(theta);
}

namespace {

Vector polished_natural(const ExpFamSpec& spec, const Vector& eta, const NewtonOptions& opts) {
  Vector theta = to_natural(spec, eta, opts);
  double rnorm = (spec.cumulant_gradient(theta) - eta).norm();
  for (int i = 0; i < 3 && rnorm > 0.0; ++i) {
    const Vector cand =
        theta - spec.cumulant_hessian(theta).ldlt().solve(spec.cumulant_gradient(theta) - eta);
    if (!spec.in_natural_domain(cand)) break;
    const double rc = (spec.cumulant_gradient(cand) - eta).norm();
    if (!(rc < rnorm)) break;
    theta = cand;
    rnorm = rc;
  }
  return theta;
}

}  // namespace

Matrix conjugate_hessian(const ExpFamSpec& spec, const Vector& eta,
                         const NewtonOptions& opts) {
  require_expectation(spec, eta);
  const int d = spec.dim();
  Matrix h(d, d);
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  for (int j = 0; j < d; ++j) {
    double step = base * std::max(1.0, std::abs(eta(j)));
    Vector plus = eta, minus = eta;
    for (int tries = 0; tries < 60; ++tries) {
      plus = eta;
      minus = eta;
      plus(j) += step;
      minus(j) -= step;
      if (spec.in_expectation_range(plus) && spec.in_expectation_range(minus)) break;
      step *= 0.5;
    }
    auto central = [&](double hstep) {
      Vector hp = eta, hm = eta;
      hp(j) += hstep;
      hm(j) -= hstep;
      return Vector((polished_natural(spec, hp, opts) - polished_natural(spec, hm, opts)) /
                    (2.0 * hstep));
    };
    // Richardson extrapolation of the central difference.
    h.col(j) = (4.0 * central(0.5 * step) - central(step)) / 3.0;
  }
  return 0.5 * (h + h.transpose());
}

double bregman(const ExpFamSpec& spec, const Vector& theta2, const Vector& theta1) {
  require_natural(spec, theta1);
  require_natural(spec, theta2);
  return spec.cumulant(theta2) - spec.cumulant(theta1) -
         (theta2 - theta1).dot(spec.cumulant_gradient(theta1));
}

double bregman_mixed(const ExpFamSpec& spec, const Vector& theta2,
                     const Vector& eta1, const NewtonOptions& opts) {
  require_natural(spec, theta2);
  return spec.cumulant(theta2) + legendre_conjugate(spec, eta1, opts) -
         theta2.dot(eta1);
}

double bregman_dual(const ExpFamSpec& spec, const Vector& eta1,
                    const Vector& eta2, const NewtonOptions& opts) {
  const Vector grad2 = to_natural(spec, eta2, opts);
  const double conj2 = eta2.dot(grad2) - spec.cumulant(grad2);
  return legendre_conjugate(spec, eta1, opts) - conj2 - (eta1 - eta2).dot(grad2);
}

double kl_via_bregman(const ExpFamSpec& spec, const Vector& theta1,
                      const Vector& theta2) {
  return bregman(spec, theta2, theta1);
}

DualPoint mle(const ExpFamSpec& spec, std::span<const double> points,
              const NewtonOptions& opts) {
  if (points.empty()) throw UsageError("MLE needs a non-empty batch");
  Vector eta = Vector::Zero(spec.dim());
  for (double x : points) {
    if (!spec.in_support(x)) {
      std::ostringstream msg;
      msg << "sample point " << x << " is outside the support of " << spec.name();
      throw SupportError(msg.str());
    }
    eta += spec.sufficient_statistic(x);
  }
  eta /= static_cast<double>(points.size());
  if (!spec.in_expectation_range(eta))
    throw BoundaryError("mean sufficient statistic " + describe(eta) +
                        " is on the boundary of the gradient range; the MLE "
                        "does not exist");
  return DualPoint{to_natural(spec, eta, opts), eta};
}

double log_density(const ExpFamSpec& spec, const Vector& theta, double x) {
  require_natural(spec, theta);
  if (!spec.in_support(x)) throw SupportError("sample point outside the support");
  return theta.dot(spec.sufficient_statistic(x)) - spec.cumulant(theta) +
         spec.carrier(x);
}

BregmanFormCheck log_density_bregman_form(const ExpFamSpec& spec,
                                          const Vector& theta, double x,
                                          const NewtonOptions& opts) {
  BregmanFormCheck c;
  c.lhs = log_density(spec, theta, x);
  const Vector eta = spec.cumulant_gradient(theta);
  const Vector t = spec.sufficient_statistic(x);
  const double k = spec.carrier(x);
  if (spec.in_expectation_range(t)) {
    c.rhs = -bregman_dual(spec, t, eta, opts) + legendre_conjugate(spec, t, opts) + k;
  } else {
    const Vector grad = to_natural(spec, eta, opts);
    c.rhs = legendre_conjugate(spec, eta, opts) + (t - eta).dot(grad) + k;
    c.limit_form = true;
  }
  c.residual = std::abs(c.lhs - c.rhs);
  return c;
}

}  // namespace raogeo
