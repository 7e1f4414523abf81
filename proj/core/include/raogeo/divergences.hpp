#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "raogeo/families.hpp"

namespace raogeo {

/// Convex generator f of an f-divergence D_f(p:q) = sum/integral of
/// p f(q/p), standardized so that f(1) = f'(1) = 0 and f''(1) = 1.
///
/// With this orientation the "kl" generator is -log u + u - 1, which gives
/// D_f(p:q) = KL(p:q); "rkl" (u log u - u + 1) gives KL(q:p).
struct FGenerator {
  std::string name;
  std::function<double(double)> f;
  /// f(exp(t)); lets the engine evaluate extreme density ratios from logs.
  std::function<double(double)> f_of_log;
  double value_at_0 = 0.0;    ///< f(0+), may be +inf
  double slope_at_inf = 0.0;  ///< lim f(u)/u as u -> inf, may be +inf
  /// Total variation is not differentiable at 1 and skips the f''(1) check.
  bool smooth_at_one = true;
};

FGenerator kl_generator();
FGenerator reverse_kl_generator();
/// 2 (sqrt(u) - 1)^2; D_f equals 4 H^2 = D_0.
FGenerator hellinger_generator();
/// |u - 1| / 2.
FGenerator total_variation_generator();
/// Standardized alpha-family generator; D_f equals alpha_divergence for
/// |alpha| < 1.
FGenerator alpha_generator(double alpha);
/// "kl", "rkl", "hellinger", "tv", "alpha:A".
FGenerator make_generator(const std::string& name);
std::vector<FGenerator> builtin_generators();

struct GeneratorCheck {
  double value = 0.0;      ///< f(1)
  double slope = 0.0;      ///< f'(1)
  double curvature = 0.0;  ///< f''(1)
  bool ok = false;
};
/// Finite-difference check of the standardization at u = 1 (tolerance 1e-6).
GeneratorCheck check_generator(const FGenerator& gen);

/// Probability vector on a finite alphabet; entries nonnegative and summing
/// to 1 within 1e-12.
class DiscreteDist {
 public:
  explicit DiscreteDist(std::vector<double> probs);
  std::span<const double> probs() const { return probs_; }
  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<double> probs_;
};

/// Disjoint bins (0-based letter indices) covering {0..m-1}.
class Partition {
 public:
  Partition(std::vector<std::vector<int>> bins, int alphabet_size);
  static Partition singletons(int alphabet_size);
  const std::vector<std::vector<int>>& bins() const { return bins_; }
  int alphabet_size() const { return m_; }

 private:
  std::vector<std::vector<int>> bins_;
  int m_;
};

// --- finite alphabets ------------------------------------------------------
// +inf is an ordinary result (e.g. KL with q = 0 where p > 0).

double f_divergence(const FGenerator& gen, const DiscreteDist& p,
                    const DiscreteDist& q);
double kl(const DiscreteDist& p, const DiscreteDist& q);
double reverse_kl(const DiscreteDist& p, const DiscreteDist& q);
double cross_entropy(const DiscreteDist& p, const DiscreteDist& q);
double shannon_entropy(const DiscreteDist& p);
double alpha_divergence(double alpha, const DiscreteDist& p,
                        const DiscreteDist& q);
double bhattacharyya(const DiscreteDist& p, const DiscreteDist& q);
double hellinger_sq(const DiscreteDist& p, const DiscreteDist& q);

DiscreteDist coarse_grain(const DiscreteDist& p, const Partition& part);

// --- two members of one family ---------------------------------------------

struct DivergenceValue {
  double value = 0.0;
  double residual = 0.0;  ///< quadrature error estimate (0 for sums)
  std::string method;     ///< "sum", "series" or "quadrature"
};

DivergenceValue f_divergence(const FGenerator& gen, const Family& family,
                             const ParamPoint& p, const ParamPoint& q,
                             const QuadratureOptions& opts = {});
DivergenceValue kl(const Family& family, const ParamPoint& p,
                   const ParamPoint& q, const QuadratureOptions& opts = {});
DivergenceValue reverse_kl(const Family& family, const ParamPoint& p,
                           const ParamPoint& q,
                           const QuadratureOptions& opts = {});
DivergenceValue cross_entropy(const Family& family, const ParamPoint& p,
                              const ParamPoint& q,
                              const QuadratureOptions& opts = {});
DivergenceValue shannon_entropy(const Family& family, const ParamPoint& p,
                                const QuadratureOptions& opts = {});
DivergenceValue alpha_divergence(double alpha, const Family& family,
                                 const ParamPoint& p, const ParamPoint& q,
                                 const QuadratureOptions& opts = {});
DivergenceValue bhattacharyya(const Family& family, const ParamPoint& p,
                              const ParamPoint& q,
                              const QuadratureOptions& opts = {});
DivergenceValue hellinger_sq(const Family& family, const ParamPoint& p,
                             const ParamPoint& q,
                             const QuadratureOptions& opts = {});

/// Within this band of +-1 alpha_divergence returns the KL limit.
inline constexpr double kAlphaGuardBand = 1e-6;

/// (x - y)^T M (x - y); M must be symmetric positive definite.
double mahalanobis_sq(const Matrix& m, const Vector& x, const Vector& y);

// --- invariance under sample-space maps -------------------------------------

/// Smooth strictly monotone map of the real line.
struct SampleSpaceMap {
  std::string name;
  std::function<double(double)> forward;
  std::function<double(double)> derivative;
  std::function<double(double)> inverse;
};

SampleSpaceMap identity_map();
/// y = a x + b, a != 0.
SampleSpaceMap affine_map(double a, double b);
/// y = x^3 + x.
SampleSpaceMap cubic_map();

struct InvarianceCheck {
  double original = 0.0;
  double transformed = 0.0;
  double residual = 0.0;  ///< |transformed - original|
};

/// Evaluates D_f between the two members and between their images under
/// `map`, each by its own quadrature over its own sample space. Continuous
/// families only.
InvarianceCheck pushforward_density_check(const Family& family,
                                          const SampleSpaceMap& map,
                                          const ParamPoint& p1,
                                          const ParamPoint& p2,
                                          const FGenerator& gen,
                                          const QuadratureOptions& opts = {});

}  // namespace raogeo
