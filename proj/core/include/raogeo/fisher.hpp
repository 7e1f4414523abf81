#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "raogeo/families.hpp"

namespace raogeo {

/// How a Fisher information matrix is evaluated.
enum class FisherMethod {
  ScoreOuter,  ///< E[s s^T] with the analytic score
  NegHessian,  ///< -E[d^2 log p], Hessian by central differences of the score
  SqrtForm,    ///< 4 * integral of d sqrt(p) d sqrt(p), by finite differences
  Analytic,    ///< closed form of the family
  MonteCarlo,  ///< sample average of s s^T; validation only
};

std::string to_string(FisherMethod method);
/// Accepts "score-outer", "neg-hessian", "sqrt-form", "analytic",
/// "monte-carlo"; throws UsageError otherwise.
FisherMethod parse_fisher_method(const std::string& label);

/// Symmetric positive-definite Fisher information at a parameter point.
///
/// Construction rejects matrices with asymmetry above 1e-12 (relative to
/// the largest entry) or with smallest eigenvalue below 1e-10 times the
/// largest, throwing DefinitenessError.
class MetricTensor {
 public:
  MetricTensor(ParamPoint at, Matrix matrix, std::string method,
               double residual = 0.0);

  const ParamPoint& at() const { return at_; }
  const Matrix& matrix() const { return matrix_; }
  const std::string& method() const { return method_; }
  /// Estimated absolute error of the entries (quadrature or Monte Carlo).
  double residual() const { return residual_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

 private:
  ParamPoint at_;
  Matrix matrix_;
  std::string method_;
  double residual_;
};

struct FisherOptions {
  QuadratureOptions quadrature{};
  long mc_samples = 100000;
  std::uint64_t mc_seed = 0;
};

/// Gradient of log p_theta(x) in theta's chart.
Vector score(const Family& family, const ParamPoint& theta, double x);

MetricTensor fisher_information(const Family& family, const ParamPoint& theta,
                                FisherMethod method,
                                const FisherOptions& opts = {});

/// Covariant transformation I' = J^T I J, where J = d(old coords)/d(new
/// coords). The result is located at `at` when given, otherwise at the
/// input's point with the chart label suffixed by "'".
MetricTensor pushforward_metric(const MetricTensor& metric,
                                const Matrix& jacobian,
                                std::optional<ParamPoint> at = std::nullopt);

/// Per-coordinate central-difference step cbrt(eps) * max(1, |theta_i|),
/// shrunk until both stencil points stay in the domain.
Vector fd_steps(const Family& family, const ParamPoint& theta);

}  // namespace raogeo
