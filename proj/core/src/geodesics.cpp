#include "raogeo/geodesics.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "raogeo/error.hpp"

namespace raogeo {

namespace {

constexpr int kMinSteps = 16;

Matrix metric_at(const Family& family, const Vector& coords, const std::string& chart) {
  return family.fisher_closed_form(ParamPoint{coords, chart});
}

bool inside(const Family& family, const Vector& coords, const std::string& chart) {
  return coords.allFinite() && family.in_domain(ParamPoint{coords, chart});
}

// d g / d theta_j by central differences at step h, per coordinate.
std::vector<Matrix> metric_derivatives(const Family& family, const ParamPoint& theta,
                                       const Vector& h) {
  const int d = theta.dim();
  std::vector<Matrix> dg(d);
  for (int j = 0; j < d; ++j) {
    Vector plus = theta.coords, minus = theta.coords;
    plus(j) += h(j);
    minus(j) -= h(j);
    dg[j] = (metric_at(family, plus, theta.chart) - metric_at(family, minus, theta.chart)) /
            (2.0 * h(j));
  }
  return dg;
}

std::vector<Matrix> assemble_first_kind(const std::vector<Matrix>& dg) {
  const int d = static_cast<int>(dg.size());
  std::vector<Matrix> gamma(d, Matrix::Zero(d, d));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const double v = 0.5 * (dg[j](i, k) + dg[i](k, j) - dg[k](i, j));
        gamma[k](i, j) = v;
        gamma[k](j, i) = v;
      }
  return gamma;
}

Vector acceleration(const Family& family, const Vector& coords, const std::string& chart,
                    const Vector& v, const ChristoffelOptions& copts) {
  const ParamPoint at{coords, chart};
  const Matrix g = family.fisher_closed_form(at);
  const Vector c = christoffel(family, at, copts).contract(v);
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success)
    throw DefinitenessError("metric is not positive definite along the path", 0.0);
  return -llt.solve(c);
}

double path_length(const std::vector<double>& speed, double h) {
  // Composite Simpson; a trailing 3/8 panel absorbs an odd interval count.
  const int n = static_cast<int>(speed.size()) - 1;
  const int simpson_end = (n % 2 == 0) ? n : n - 3;
  double sum = 0.0;
  for (int i = 0; i + 2 <= simpson_end; i += 2)
    sum += h / 3.0 * (speed[i] + 4.0 * speed[i + 1] + speed[i + 2]);
  if (simpson_end != n) {
    const int i = simpson_end;
    sum += 3.0 * h / 8.0 *
           (speed[i] + 3.0 * speed[i + 1] + 3.0 * speed[i + 2] + speed[i + 3]);
  }
  return sum;
}

struct ShotEnd {
  Vector theta;
  bool exited = false;
};

// Endpoint of a shot, reporting domain exits instead of throwing.
ShotEnd shoot_endpoint(const Family& family, const ParamPoint& theta0, const Vector& v0,
                       int steps, const ChristoffelOptions& copts) {
  try {
    const GeodesicPath p = geodesic_shoot(family, theta0, v0, steps, copts);
    return {p.nodes.back().theta, false};
  } catch (const GeodesicExitError&) {
    return {Vector(), true};
  }
}

// Initial velocity of the Gaussian geodesic from (mu1, s1) to (mu2, s2) in
// the mu-sigma chart, from the half-plane picture.
Vector hyperbolic_velocity(const Vector& a, const Vector& b) {
  const double x1 = a(0) / std::numbers::sqrt2, y1 = a(1);
  const double x2 = b(0) / std::numbers::sqrt2, y2 = b(1);
  Vector w(2);
  const double scale = std::max({1.0, std::abs(x1), std::abs(x2), y1, y2});
  if (std::abs(x2 - x1) <= 1e-14 * scale) {
    w << 0.0, (y2 >= y1 ? 1.0 : -1.0);
  } else {
    const double c = (x2 * x2 + y2 * y2 - x1 * x1 - y1 * y1) / (2.0 * (x2 - x1));
    w << y1, -(x1 - c);
    if ((x2 - x1) * w(0) < 0.0) w = -w;
    w.normalize();
  }
  const double dist = rao_distance_gaussian_hyperbolic(ParamPoint{a, "mu-sigma"},
                                                       ParamPoint{b, "mu-sigma"});
  // Fisher speed of (dx, dy) at y1 is sqrt 2 |w| / y1.
  const double mag = dist * y1 / std::numbers::sqrt2;
  return make_vector({std::numbers::sqrt2 * mag * w(0), mag * w(1)});
}

Vector initial_velocity(const Family& family, const ParamPoint& a, const ParamPoint& b) {
  if (family.name() == "gaussian1d") {
    const ParamPoint ab = reparameterize(family, a, "mu-sigma");
    const ParamPoint bb = reparameterize(family, b, "mu-sigma");
    const Vector v_base = hyperbolic_velocity(ab.coords, bb.coords);
    if (a.chart == "mu-sigma") return v_base;
    // d(mu-sigma) = J_ms d(chart), J_ms = d(mu-sigma)/d(chart).
    const Matrix j = chart_jacobian(family, ParamPoint{ab.coords, "mu-sigma"}, a.chart);
    return j.colPivHouseholderQr().solve(v_base);
  }
  return b.coords - a.coords;
}

void require_same_chart(const ParamPoint& a, const ParamPoint& b) {
  if (a.chart != b.chart)
    throw UsageError("endpoints are in different charts ('" + a.chart + "' and '" +
                     b.chart + "')");
}

void require_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw UsageError("geodesic parameter lambda must lie in [0, 1]");
}

Matrix cholesky_factor(const MetricTensor& metric) {
  Eigen::LLT<Matrix> llt(metric.matrix());
  if (llt.info() != Eigen::Success)
    throw DefinitenessError("Cholesky factorization failed: metric is not positive definite", 0.0);
  return llt.matrixL();
}

}  // namespace

Vector ChristoffelField::contract(const Vector& v) const {
  const int d = static_cast<int>(gamma.size());
  Vector c(d);
  for (int k = 0; k < d; ++k) c(k) = v.dot(gamma[k] * v);
  return c;
}

ChristoffelField christoffel(const Family& family, const ParamPoint& theta,
                             const ChristoffelOptions& opts) {
  family.validate(theta);
  if (opts.prefer_analytic) {
    if (auto g = family.closed_form_christoffel(theta))
      return ChristoffelField{theta, std::move(*g), "analytic"};
  }
  const int d = theta.dim();
  Vector h(d);
  for (int j = 0; j < d; ++j) {
    const double scale = std::max(1.0, std::abs(theta.coords(j)));
    double step = opts.step * scale;
    for (;;) {
      Vector plus = theta.coords, minus = theta.coords;
      plus(j) += step;
      minus(j) -= step;
      if (inside(family, plus, theta.chart) && inside(family, minus, theta.chart)) break;
      step *= 0.5;
      if (step < 1e-9 * scale)
        throw DomainError("point is too close to the domain boundary for the "
                          "Christoffel difference stencil");
    }
    h(j) = step;
  }
  std::vector<Matrix> dg = metric_derivatives(family, theta, h);
  if (opts.richardson) {
    const std::vector<Matrix> fine = metric_derivatives(family, theta, 0.5 * h);
    for (int j = 0; j < d; ++j) dg[j] = (4.0 * fine[j] - dg[j]) / 3.0;
  }
  return ChristoffelField{theta, assemble_first_kind(dg), "finite-difference"};
}

GeodesicPath geodesic_shoot(const Family& family, const ParamPoint& theta0,
                            const Vector& v0, int steps, const ChristoffelOptions& copts) {
  family.validate(theta0);
  if (steps < kMinSteps) throw UsageError("geodesic integration needs at least 16 steps");
  if (v0.size() != theta0.dim()) throw UsageError("initial velocity has the wrong dimension");
  if (!v0.allFinite()) throw UsageError("initial velocity is not finite");

  const std::string& chart = theta0.chart;
  const double h = 1.0 / steps;
  GeodesicPath path;
  path.family = family.name();
  path.chart = chart;
  path.nodes.reserve(steps + 1);

  auto accel = [&](const Vector& x, const Vector& v, double t) -> Vector {
    if (!inside(family, x, chart)) {
      std::ostringstream msg;
      msg << "geodesic left the domain of chart '" << chart << "' near t = " << t;
      throw GeodesicExitError(msg.str(), t);
    }
    try {
      return acceleration(family, x, chart, v, copts);
    } catch (const DomainError& e) {
      throw GeodesicExitError(e.what(), t);
    }
  };

  Vector x = theta0.coords, v = v0;
  std::vector<Vector> acc;
  acc.reserve(steps + 1);
  path.nodes.push_back({0.0, x, v});
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const Vector a1 = accel(x, v, t);
    if (i == 0) acc.push_back(a1);
    const Vector k1x = v, k1v = a1;
    const Vector k2x = v + 0.5 * h * k1v;
    const Vector k2v = accel(x + 0.5 * h * k1x, k2x, t + 0.5 * h);
    const Vector k3x = v + 0.5 * h * k2v;
    const Vector k3v = accel(x + 0.5 * h * k2x, k3x, t + 0.5 * h);
    const Vector k4x = v + h * k3v;
    const Vector k4v = accel(x + h * k3x, k4x, t + h);
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    const double t_next = (i + 1 == steps) ? 1.0 : (i + 1) * h;
    acc.push_back(accel(x, v, t_next));
    path.nodes.push_back({t_next, x, v});
  }

  path.speeds.reserve(path.nodes.size());
  for (const GeodesicNode& n : path.nodes) {
    const Matrix g = metric_at(family, n.theta, chart);
    path.speeds.push_back(std::sqrt(std::max(0.0, n.velocity.dot(g * n.velocity))));
  }
  path.length = path_length(path.speeds, h);
  const auto [lo, hi] = std::minmax_element(path.speeds.begin(), path.speeds.end());
  double mean = 0.0;
  for (double s : path.speeds) mean += s;
  mean /= static_cast<double>(path.speeds.size());
  path.speed_variation = mean > 0.0 ? (*hi - *lo) / mean : 0.0;
  for (int i = 1; i < steps; ++i) {
    const Vector dv = (path.nodes[i + 1].velocity - path.nodes[i - 1].velocity) / (2.0 * h);
    path.ode_residual = std::max(path.ode_residual, (dv - acc[i]).norm());
  }
  path.endpoint_residual = 0.0;
  return path;
}

GeodesicPath geodesic_connect(const Family& family, const ParamPoint& theta1,
                              const ParamPoint& theta2, const ConnectOptions& opts) {
  family.validate(theta1);
  family.validate(theta2);
  require_same_chart(theta1, theta2);
  if (!(opts.tol > 0.0)) throw UsageError("connection tolerance must be positive");

  auto finish = [&](GeodesicPath p, int iterations) {
    p.endpoint_residual = (p.nodes.back().theta - theta2.coords).norm();
    p.newton_iterations = iterations;
    return p;
  };

  if (theta1.coords == theta2.coords)
    return finish(geodesic_shoot(family, theta1, Vector::Zero(theta1.dim()), opts.steps,
                                 opts.christoffel),
                  0);

  const int d = theta1.dim();
  Vector v = initial_velocity(family, theta1, theta2);
  ShotEnd end = shoot_endpoint(family, theta1, v, opts.steps, opts.christoffel);
  if (end.exited) {
    v = theta2.coords - theta1.coords;
    end = shoot_endpoint(family, theta1, v, opts.steps, opts.christoffel);
    if (end.exited)
      throw SolverError("no initial velocity keeps the geodesic inside the domain",
                        std::numeric_limits<double>::infinity());
  }
  Vector r = end.theta - theta2.coords;
  double rnorm = r.norm();

  int it = 0;
  for (; it < opts.max_iter && rnorm >= opts.tol; ++it) {
    Matrix jac(d, d);
    for (int j = 0; j < d; ++j) {
      const double h = 1e-6 * std::max(1.0, v.norm());
      Vector vp = v, vm = v;
      vp(j) += h;
      vm(j) -= h;
      const ShotEnd ep = shoot_endpoint(family, theta1, vp, opts.steps, opts.christoffel);
      const ShotEnd em = shoot_endpoint(family, theta1, vm, opts.steps, opts.christoffel);
      if (!ep.exited && !em.exited)
        jac.col(j) = (ep.theta - em.theta) / (2.0 * h);
      else if (!ep.exited)
        jac.col(j) = (ep.theta - end.theta) / h;
      else if (!em.exited)
        jac.col(j) = (end.theta - em.theta) / h;
      else
        throw SolverError("shooting Jacobian stencil leaves the domain", rnorm);
    }
    const Vector delta = jac.colPivHouseholderQr().solve(-r);
    if (!delta.allFinite()) throw SolverError("singular shooting Jacobian", rnorm);
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving, step *= 0.5) {
      const Vector cand = v + step * delta;
      const ShotEnd ec = shoot_endpoint(family, theta1, cand, opts.steps, opts.christoffel);
      if (ec.exited) continue;
      const Vector rc = ec.theta - theta2.coords;
      if (rc.norm() < rnorm) {
        v = cand;
        end = ec;
        r = rc;
        rnorm = rc.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (rnorm >= opts.tol) {
    std::ostringstream msg;
    msg << "geodesic boundary-value problem did not converge (best endpoint residual "
        << rnorm << ")";
    throw SolverError(msg.str(), rnorm);
  }
  return finish(geodesic_shoot(family, theta1, v, opts.steps, opts.christoffel), it);
}

double rao_distance_numeric(const Family& family, const ParamPoint& theta1,
                            const ParamPoint& theta2, const ConnectOptions& opts) {
  return geodesic_connect(family, theta1, theta2, opts).length;
}

double rao_distance_gaussian_hyperbolic(const ParamPoint& theta1, const ParamPoint& theta2) {
  static const FamilyPtr gaussian = make_gaussian1d();
  const Vector a = reparameterize(*gaussian, theta1, "mu-sigma").coords;
  const Vector b = reparameterize(*gaussian, theta2, "mu-sigma").coords;
  const double dx = (a(0) - b(0)) / std::numbers::sqrt2;
  const double dy = a(1) - b(1);
  // arccosh(1 + r^2 / (2 y1 y2)) written as 2 asinh to keep small distances accurate.
  const double half = std::hypot(dx, dy) / (2.0 * std::sqrt(a(1) * b(1)));
  return std::numbers::sqrt2 * 2.0 * std::asinh(half);
}

double rao_distance_closed_form(const Family& family, const ParamPoint& theta1,
                                const ParamPoint& theta2) {
  const Vector a = family.base_coords(theta1);
  const Vector b = family.base_coords(theta2);
  if (family.name() == "gaussian1d") return rao_distance_gaussian_hyperbolic(theta1, theta2);
  if (family.name() == "poisson") return std::abs(2.0 * std::sqrt(b(0)) - 2.0 * std::sqrt(a(0)));
  if (family.name().rfind("discrete:", 0) == 0) {
    double bc = std::sqrt(std::max(0.0, 1.0 - a.sum()) * std::max(0.0, 1.0 - b.sum()));
    for (int i = 0; i < a.size(); ++i) bc += std::sqrt(a(i) * b(i));
    return 2.0 * std::acos(std::clamp(bc, -1.0, 1.0));
  }
  throw UsageError("no closed-form Rao distance for family '" + family.name() + "'");
}

Vector e_geodesic(const ExpFamSpec& spec, const Vector& theta1, const Vector& theta2,
                  double lambda) {
  require_lambda(lambda);
  if (theta1.size() != spec.dim() || theta2.size() != spec.dim())
    throw UsageError("natural parameter has the wrong dimension");
  if (!spec.in_natural_domain(theta1) || !spec.in_natural_domain(theta2))
    throw DomainError("e-geodesic endpoint outside the natural domain");
  constexpr int kProbe = 32;
  for (int i = 1; i < kProbe; ++i) {
    const double l = static_cast<double>(i) / kProbe;
    if (!spec.in_natural_domain((1.0 - l) * theta1 + l * theta2))
      throw DomainError("e-geodesic segment exits the natural domain");
  }
  if (lambda == 0.0) return theta1;
  if (lambda == 1.0) return theta2;
  const Vector out = (1.0 - lambda) * theta1 + lambda * theta2;
  if (!spec.in_natural_domain(out))
    throw DomainError("e-geodesic segment exits the natural domain");
  return out;
}

Vector m_geodesic(const ExpFamSpec& spec, const Vector& eta1, const Vector& eta2,
                  double lambda) {
  require_lambda(lambda);
  if (eta1.size() != spec.dim() || eta2.size() != spec.dim())
    throw UsageError("expectation parameter has the wrong dimension");
  if (!spec.in_expectation_range(eta1) || !spec.in_expectation_range(eta2))
    throw DomainError("m-geodesic endpoint outside the expectation range");
  constexpr int kProbe = 32;
  for (int i = 1; i < kProbe; ++i) {
    const double l = static_cast<double>(i) / kProbe;
    if (!spec.in_expectation_range((1.0 - l) * eta1 + l * eta2))
      throw DomainError("m-geodesic segment exits the expectation range");
  }
  if (lambda == 0.0) return eta1;
  if (lambda == 1.0) return eta2;
  const Vector out = (1.0 - lambda) * eta1 + lambda * eta2;
  if (!spec.in_expectation_range(out))
    throw DomainError("m-geodesic segment exits the expectation range");
  return out;
}

CosineRelation cosine_relation(const ExpFamSpec& spec, const Vector& p, const Vector& q,
                               const Vector& r) {
  CosineRelation c;
  c.lhs = bregman(spec, p, q) + bregman(spec, q, r) - bregman(spec, p, r);
  c.rhs = (p - q).dot(to_expectation(spec, r) - to_expectation(spec, q));
  c.residual = std::abs(c.lhs - c.rhs);
  return c;
}

double cosine_residual(const ExpFamSpec& spec, const Vector& p, const Vector& q,
                       const Vector& r) {
  return cosine_relation(spec, p, q, r).residual;
}

OrthogonalTriple orthogonal_triple(const ExpFamSpec& spec, const Vector& q, const Vector& u,
                                   const Vector& w, double t, double s) {
  const Vector eta_q = to_expectation(spec, q);
  const Matrix fisher = spec.cumulant_hessian(q);
  const double uu = u.dot(fisher * u);
  if (!(uu > 0.0)) throw UsageError("e-direction must be nonzero");
  const Vector w_perp = w - (u.dot(fisher * w) / uu) * u;
  OrthogonalTriple out;
  out.q = q;
  out.p = q + t * u;
  if (!spec.in_natural_domain(out.p))
    throw DomainError("orthogonal construction leaves the natural domain");
  const Vector eta_r = eta_q + s * (fisher * w_perp);
  out.r = to_natural(spec, eta_r);
  return out;
}

double tangent_embed(const MetricTensor& metric, const Vector& p, const Vector& q) {
  const Matrix l = cholesky_factor(metric);
  return (l.transpose() * p - l.transpose() * q).squaredNorm();
}

double tangent_quadratic_form(const MetricTensor& metric, const Vector& p, const Vector& q) {
  const Vector d = p - q;
  return d.dot(metric.matrix() * d);
}

Vector tangent_coordinates(const MetricTensor& metric, const Vector& x) {
  return cholesky_factor(metric).transpose() * x;
}

}  // namespace raogeo
