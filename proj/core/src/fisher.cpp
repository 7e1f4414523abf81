#include "raogeo/fisher.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "raogeo/error.hpp"
#include "raogeo/linalg.hpp"

namespace raogeo {

std::string to_string(FisherMethod method) {
  switch (method) {
    case FisherMethod::ScoreOuter: return "score-outer";
    case FisherMethod::NegHessian: return "neg-hessian";
    case FisherMethod::SqrtForm: return "sqrt-form";
    case FisherMethod::Analytic: return "analytic";
    case FisherMethod::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

FisherMethod parse_fisher_method(const std::string& label) {
  for (auto m : {FisherMethod::ScoreOuter, FisherMethod::NegHessian,
                 FisherMethod::SqrtForm, FisherMethod::Analytic,
                 FisherMethod::MonteCarlo}) {
    if (to_string(m) == label) return m;
  }
  throw UsageError("unknown Fisher method '" + label +
                   "' (known: score-outer, neg-hessian, sqrt-form, analytic, "
                   "monte-carlo)");
}

MetricTensor::MetricTensor(ParamPoint at, Matrix matrix, std::string method,
                           double residual)
    : at_(std::move(at)),
      matrix_(std::move(matrix)),
      method_(std::move(method)),
      residual_(residual) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
    throw DefinitenessError("metric tensor must be a non-empty square matrix",
                            0.0);
  if (!matrix_.allFinite())
    throw DefinitenessError("metric tensor has non-finite entries", INFINITY);
  if (!is_symmetric(matrix_, 1e-12)) {
    throw DefinitenessError("metric tensor is not symmetric",
                            max_asymmetry(matrix_));
  }
  const auto [lo, hi] = eigen_range(matrix_);
  if (!(hi > 0.0) || lo < 1e-10 * hi) {
    std::ostringstream msg;
    msg << "metric tensor is not positive definite (eigenvalues in [" << lo
        << ", " << hi << "])";
    throw DefinitenessError(msg.str(), lo);
  }
}

Vector score(const Family& family, const ParamPoint& theta, double x) {
  return family.score(theta, x);
}

Vector fd_steps(const Family& family, const ParamPoint& theta) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  Vector h(theta.dim());
  for (int i = 0; i < theta.dim(); ++i) {
    double step = base * std::max(1.0, std::abs(theta.coords(i)));
    for (int tries = 0; tries < 60; ++tries) {
      ParamPoint plus = theta, minus = theta;
      plus.coords(i) += step;
      minus.coords(i) -= step;
      if (family.in_domain(plus) && family.in_domain(minus)) break;
      step *= 0.5;
    }
    h(i) = step;
  }
  return h;
}

namespace {

ParamPoint shifted(const ParamPoint& theta, int i, double delta) {
  ParamPoint p = theta;
  p.coords(i) += delta;
  return p;
}

Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unflatten(const Vector& v, int d) {
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

MetricTensor finish(const ParamPoint& theta, const QuadratureResult& r, int d,
                    FisherMethod method) {
  return MetricTensor(theta, symmetrized(unflatten(r.value, d)),
                      to_string(method), r.error);
}

}  // namespace

MetricTensor fisher_information(const Family& family, const ParamPoint& theta,
                                FisherMethod method,
                                const FisherOptions& opts) {
  family.validate(theta);
  const int d = family.param_dim();

  switch (method) {
    case FisherMethod::Analytic:
      return MetricTensor(theta, family.fisher_closed_form(theta),
                          to_string(method), 0.0);

    case FisherMethod::ScoreOuter: {
      auto g = [&](double x) -> Vector {
        const Vector s = family.score(theta, x);
        return flatten(s * s.transpose());
      };
      return finish(theta, expectation(family, theta, g, d * d, opts.quadrature),
                    d, method);
    }

    case FisherMethod::NegHessian: {
      const Vector h = fd_steps(family, theta);
      std::vector<ParamPoint> plus, minus;
      for (int j = 0; j < d; ++j) {
        plus.push_back(shifted(theta, j, h(j)));
        minus.push_back(shifted(theta, j, -h(j)));
      }
      auto g = [&](double x) -> Vector {
        Matrix neg_hess(d, d);
        for (int j = 0; j < d; ++j) {
          neg_hess.col(j) =
              -(family.score(plus[j], x) - family.score(minus[j], x)) /
              (2.0 * h(j));
        }
        return flatten(neg_hess);
      };
      return finish(theta, expectation(family, theta, g, d * d, opts.quadrature),
                    d, method);
    }

    case FisherMethod::SqrtForm: {
      const Vector h = fd_steps(family, theta);
      std::vector<ParamPoint> plus, minus;
      for (int j = 0; j < d; ++j) {
        plus.push_back(shifted(theta, j, h(j)));
        minus.push_back(shifted(theta, j, -h(j)));
      }
      auto f = [&](double x) -> Vector {
        Vector grad(d);
        for (int j = 0; j < d; ++j) {
          grad(j) = (std::sqrt(family.density(plus[j], x)) -
                     std::sqrt(family.density(minus[j], x))) /
                    (2.0 * h(j));
        }
        return flatten(4.0 * grad * grad.transpose());
      };
      return finish(theta,
                    integrate_support(family, theta, f, d * d, opts.quadrature),
                    d, method);
    }

    case FisherMethod::MonteCarlo: {
      if (opts.mc_samples < 2)
        throw UsageError("Monte Carlo Fisher needs at least 2 samples");
      const SampleBatch batch = sample(family, theta, opts.mc_seed, opts.mc_samples);
      const auto n = static_cast<double>(batch.points.size());
      Matrix mean = Matrix::Zero(d, d);
      Matrix mean_sq = Matrix::Zero(d, d);
      for (double x : batch.points) {
        const Vector s = family.score(theta, x);
        const Matrix outer = s * s.transpose();
        mean += outer;
        mean_sq += outer.cwiseProduct(outer);
      }
      mean /= n;
      mean_sq /= n;
      const Matrix var = (mean_sq - mean.cwiseProduct(mean)).cwiseMax(0.0);
      const double se = std::sqrt(var.maxCoeff() / n);
      return MetricTensor(theta, symmetrized(mean), to_string(method), se);
    }
  }
  throw UsageError("unhandled Fisher method");
}

MetricTensor pushforward_metric(const MetricTensor& metric,
                                const Matrix& jacobian,
                                std::optional<ParamPoint> at) {
  const int d = metric.dim();
  if (jacobian.rows() != d || jacobian.cols() != d)
    throw UsageError("Jacobian dimension does not match the metric");
  const double det = jacobian.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12)
    throw DefinitenessError("Jacobian is singular", std::abs(det));
  ParamPoint where = at.value_or(
      ParamPoint{metric.at().coords, metric.at().chart + "'"});
  const Matrix m = jacobian.transpose() * metric.matrix() * jacobian;
  return MetricTensor(std::move(where), symmetrized(m), "pushforward",
                      metric.residual());
}

}  // namespace raogeo
