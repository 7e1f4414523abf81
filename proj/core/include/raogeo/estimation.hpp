#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "raogeo/families.hpp"

namespace raogeo {

/// An estimator of some coordinates of a chart from an iid batch.
struct EstimatorSpec {
  std::string name;
  std::string target_chart;
  /// Estimated coordinates of target_chart; the remaining ones are treated
  /// as known, so the relevant bound is (n I_SS)^-1 on this block.
  std::vector<int> components;
  std::function<Vector(std::span<const double>)> map;
  bool unbiased_claim = true;
  long min_n = 1;
};

/// Registry of built-in estimators.
///
///   poisson     mean, first, constant            (chart lambda)
///   gaussian1d  mean, first                      (chart mu-sigma, mu only)
///               mean-var                         (chart mu-sigmasq, both)
///   discrete:m  freq, first                      (chart probs)
///   any         constant[:v1,v2,...]             (theta_star's chart)
///
/// "first" uses only the first observation: unbiased but inefficient.
/// "constant" ignores the data and returns theta_0 (default theta_star),
/// unbiased only at theta_0.
EstimatorSpec make_estimator(const Family& family, const std::string& name,
                             const ParamPoint& theta_star);

/// n^-1 I^-1(theta_star) in theta_star's chart.
Matrix crlb(const Family& family, const ParamPoint& theta_star, long n);
/// (n I_SS)^-1 for the coordinate block S with the others known.
Matrix crlb_block(const Family& family, const ParamPoint& theta_star, long n,
                  std::span<const int> components);

/// Monte Carlo estimator-efficiency record.
struct EstimatorReport {
  std::string estimator;
  std::string family;
  ParamPoint theta_star;
  std::vector<int> components;
  long n = 0;
  long replicates = 0;
  std::uint64_t seed = 0;
  Vector empirical_mean;
  Matrix empirical_cov;  ///< 1/(R-1) normalization
  Matrix crlb_matrix;
  double loewner_slack = 0.0;  ///< min eigenvalue of empirical_cov - crlb
  double loewner_slack_se = 0.0;
  double bias_norm = 0.0;
  /// crlb diagonal / empirical variance per component.
  Vector efficiency;
  /// Standard error of each empirical variance.
  Vector variance_se;
  bool unbiased_claim = true;
  std::string regularity = "asserted";
  /// Per-replicate estimates, filled when requested.
  std::vector<Vector> estimates;
};

struct MonteCarloOptions {
  unsigned threads = 0;  ///< 0: hardware concurrency
  bool keep_estimates = false;
};

/// Runs R replicates of n-sample experiments at theta_star. Replicate r
/// draws from Rng stream (seed, r); the reduction runs in replicate order,
/// so the report is bit-identical for any thread count.
EstimatorReport monte_carlo_report(const Family& family,
                                   const ParamPoint& theta_star,
                                   const EstimatorSpec& estimator, long n,
                                   long replicates, std::uint64_t seed,
                                   const MonteCarloOptions& opts = {});

/// True iff the smallest eigenvalue of A - B is at least -tol. Rejects
/// inputs that are asymmetric beyond 1e-12.
bool loewner_geq(const Matrix& a, const Matrix& b, double tol);

}  // namespace raogeo
