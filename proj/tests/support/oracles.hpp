#pragma once

// Test-side reference computations, written independently of the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

/// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double sign() { return integer(0, 1) == 0 ? -1.0 : 1.0; }

  /// Point in the open simplex; entries bounded away from 0 by `floor`.
  std::vector<double> simplex(int m, double floor = 1e-3) {
    std::vector<double> p(static_cast<std::size_t>(m));
    double sum = 0.0;
    for (double& x : p) {
      x = floor + std::exponential_distribution<double>(1.0)(eng_);
      sum += x;
    }
    for (double& x : p) x /= sum;
    return p;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

inline double poisson_log_pmf(int k, double lambda) {
  return -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
}

inline double poisson_pmf(int k, double lambda) { return std::exp(poisson_log_pmf(k, lambda)); }

/// sum_k p(k) log(p(k)/q(k)) until the remaining p-mass is below 1e-16.
inline double poisson_kl_series(double lp, double lq) {
  double total = 0.0, mass = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double lpk = poisson_log_pmf(k, lp);
    const double p = std::exp(lpk);
    total += p * (lpk - poisson_log_pmf(k, lq));
    mass += p;
    if (k > lp && 1.0 - mass < 1e-16) break;
  }
  return total;
}

/// KL(N(m1, s1^2) : N(m2, s2^2)).
inline double gaussian_kl(double m1, double s1, double m2, double s2) {
  return std::log(s2 / s1) + (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2.0 * s2 * s2) - 0.5;
}

/// Bhattacharyya distance between two normals.
inline double gaussian_bhattacharyya(double m1, double s1, double m2, double s2) {
  const double v = s1 * s1 + s2 * s2;
  return 0.25 * (m1 - m2) * (m1 - m2) / v + 0.5 * std::log(v / (2.0 * s1 * s2));
}

/// Fisher-Rao distance between normals via the arccosh form of the
/// half-plane distance with metric (dmu^2 + 2 dsigma^2) / sigma^2.
inline double gaussian_rao(double m1, double s1, double m2, double s2) {
  const double dx2 = 0.5 * (m1 - m2) * (m1 - m2);
  const double dy2 = (s1 - s2) * (s1 - s2);
  return std::numbers::sqrt2 * std::acosh(1.0 + (dx2 + dy2) / (2.0 * s1 * s2));
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace oracle
