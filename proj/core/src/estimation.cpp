#include "raogeo/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "raogeo/error.hpp"
#include "raogeo/fisher.hpp"
#include "raogeo/linalg.hpp"

namespace raogeo {

namespace {

Vector parse_constant(const std::string& spec, int dim) {
  Vector v(dim);
  std::stringstream ss(spec);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= dim) throw UsageError("too many constant estimator values");
    try {
      v(i++) = std::stod(item);
    } catch (const std::exception&) {
      throw UsageError("malformed constant estimator value '" + item + "'");
    }
  }
  if (i != dim) throw UsageError("constant estimator needs one value per coordinate");
  return v;
}

std::vector<int> all_components(int d) {
  std::vector<int> c(static_cast<std::size_t>(d));
  std::iota(c.begin(), c.end(), 0);
  return c;
}

double sample_mean(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

EstimatorSpec make_estimator(const Family& family, const std::string& name,
                             const ParamPoint& theta_star) {
  family.validate(theta_star);
  const std::string& fam = family.name();

  if (name == "constant" || name.rfind("constant:", 0) == 0) {
    const Vector value = name == "constant"
                             ? theta_star.coords
                             : parse_constant(name.substr(9), family.param_dim());
    return EstimatorSpec{name, theta_star.chart,
                         all_components(family.param_dim()),
                         [value](std::span<const double>) { return value; },
                         false, 1};
  }

  if (fam == "poisson") {
    if (name == "mean")
      return {name, "lambda", {0},
              [](std::span<const double> xs) { return make_vector({sample_mean(xs)}); },
              true, 1};
    if (name == "first")
      return {name, "lambda", {0},
              [](std::span<const double> xs) { return make_vector({xs[0]}); },
              true, 1};
  } else if (fam == "gaussian1d") {
    if (name == "mean")
      return {name, "mu-sigma", {0},
              [](std::span<const double> xs) { return make_vector({sample_mean(xs)}); },
              true, 1};
    if (name == "first")
      return {name, "mu-sigma", {0},
              [](std::span<const double> xs) { return make_vector({xs[0]}); },
              true, 1};
    if (name == "mean-var")
      return {name, "mu-sigmasq", {0, 1},
              [](std::span<const double> xs) {
                const double m = sample_mean(xs);
                double ss = 0.0;
                for (double x : xs) ss += (x - m) * (x - m);
                return make_vector({m, ss / static_cast<double>(xs.size() - 1)});
              },
              true, 2};
  } else if (fam.rfind("discrete:", 0) == 0) {
    const int d = family.param_dim();
    if (name == "freq")
      return {name, "probs", all_components(d),
              [d](std::span<const double> xs) {
                Vector f = Vector::Zero(d);
                for (double x : xs) {
                  const int letter = static_cast<int>(x);
                  if (letter <= d) f(letter - 1) += 1.0;
                }
                return Vector(f / static_cast<double>(xs.size()));
              },
              true, 1};
    if (name == "first")
      return {name, "probs", all_components(d),
              [d](std::span<const double> xs) {
                Vector f = Vector::Zero(d);
                const int letter = static_cast<int>(xs[0]);
                if (letter <= d) f(letter - 1) = 1.0;
                return f;
              },
              true, 1};
  }
  throw UsageError("unknown estimator '" + name + "' for family '" + fam + "'");
}

Matrix crlb(const Family& family, const ParamPoint& theta_star, long n) {
  return crlb_block(family, theta_star, n, all_components(family.param_dim()));
}

Matrix crlb_block(const Family& family, const ParamPoint& theta_star, long n,
                  std::span<const int> components) {
  if (n < 1) throw UsageError("sample size must be at least 1");
  const MetricTensor info =
      fisher_information(family, theta_star, FisherMethod::Analytic);
  const int k = static_cast<int>(components.size());
  Matrix block(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      block(a, b) = info.matrix()(components[a], components[b]);
  return symmetrized(spd_inverse(block) / static_cast<double>(n));
}

EstimatorReport monte_carlo_report(const Family& family,
                                   const ParamPoint& theta_star,
                                   const EstimatorSpec& estimator, long n,
                                   long replicates, std::uint64_t seed,
                                   const MonteCarloOptions& opts) {
  family.validate(theta_star);
  if (estimator.target_chart != theta_star.chart)
    throw UsageError("estimator '" + estimator.name + "' targets chart '" +
                     estimator.target_chart + "' but theta_star is in chart '" +
                     theta_star.chart + "'");
  if (replicates < 2) throw UsageError("need at least 2 replicates");
  if (n < estimator.min_n) {
    std::ostringstream msg;
    msg << "estimator '" << estimator.name << "' needs n >= " << estimator.min_n;
    throw UsageError(msg.str());
  }

  const int k = static_cast<int>(estimator.components.size());
  std::vector<Vector> estimates(static_cast<std::size_t>(replicates));
  std::vector<long> failures;
  std::mutex failure_mutex;

  auto work = [&](long begin, long end) {
    std::vector<double> batch(static_cast<std::size_t>(n));
    std::vector<long> local_failures;
    for (long r = begin; r < end; ++r) {
      try {
        Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(r));
        family.draw(theta_star, rng, batch);
        Vector est = estimator.map(batch);
        if (est.size() != k || !est.allFinite())
          throw NumericError("estimator returned an invalid value", 0.0);
        estimates[static_cast<std::size_t>(r)] = std::move(est);
      } catch (const std::exception&) {
        local_failures.push_back(r);
      }
    }
    if (!local_failures.empty()) {
      std::lock_guard lock(failure_mutex);
      failures.insert(failures.end(), local_failures.begin(), local_failures.end());
    }
  };

  unsigned threads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(
                                                         std::min<long>(replicates, 64))));
  if (threads == 1) {
    work(0, replicates);
  } else {
    std::vector<std::jthread> pool;
    const long chunk = (replicates + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const long begin = t * chunk;
      const long end = std::min(replicates, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::ostringstream msg;
    msg << failures.size() << " replicate(s) failed, first index " << failures.front();
    throw ReplicateFailure(msg.str(), failures);
  }

  const auto count = static_cast<double>(replicates);
  Vector mean = Vector::Zero(k);
  for (const auto& e : estimates) mean += e;
  mean /= count;
  Matrix cov = Matrix::Zero(k, k);
  for (const auto& e : estimates) {
    const Vector c = e - mean;
    cov += c * c.transpose();
  }
  cov = symmetrized(cov / (count - 1.0));

  EstimatorReport rep;
  rep.estimator = estimator.name;
  rep.family = family.name();
  rep.theta_star = theta_star;
  rep.components = estimator.components;
  rep.n = n;
  rep.replicates = replicates;
  rep.seed = seed;
  rep.empirical_mean = mean;
  rep.empirical_cov = cov;
  rep.crlb_matrix = crlb_block(family, theta_star, n, estimator.components);
  rep.unbiased_claim = estimator.unbiased_claim;

  Vector truth(k);
  for (int a = 0; a < k; ++a) truth(a) = theta_star.coords(estimator.components[a]);
  rep.bias_norm = (mean - truth).norm();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov - rep.crlb_matrix);
  rep.loewner_slack = eig.eigenvalues()(0);
  const Vector dir = eig.eigenvectors().col(0);

  // Standard errors of quadratic forms v^T C v from the replicate cloud:
  // sd((v^T (T_r - mean))^2) / sqrt(R).
  auto quad_form_se = [&](const Vector& v) {
    double m1 = 0.0, m2 = 0.0;
    for (const auto& e : estimates) {
      const double q = std::pow(v.dot(e - mean), 2);
      m1 += q;
      m2 += q * q;
    }
    m1 /= count;
    m2 /= count;
    return std::sqrt(std::max(0.0, m2 - m1 * m1) / count);
  };
  rep.loewner_slack_se = quad_form_se(dir);
  rep.efficiency.resize(k);
  rep.variance_se.resize(k);
  for (int a = 0; a < k; ++a) {
    rep.efficiency(a) = cov(a, a) > 0.0 ? rep.crlb_matrix(a, a) / cov(a, a) : INFINITY;
    rep.variance_se(a) = quad_form_se(Vector::Unit(k, a));
  }
  if (opts.keep_estimates) rep.estimates = std::move(estimates);
  return rep;
}

bool loewner_geq(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw UsageError("Loewner comparison of matrices with different shapes");
  if (!is_symmetric(a, 1e-12) || !is_symmetric(b, 1e-12))
    throw DefinitenessError("Loewner comparison needs symmetric matrices",
                            std::max(max_asymmetry(a), max_asymmetry(b)));
  const auto [lo, hi] = eigen_range(symmetrized(a - b));
  (void)hi;
  return lo >= -tol;
}

}  // namespace raogeo
