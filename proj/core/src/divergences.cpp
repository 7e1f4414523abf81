#include "raogeo/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "raogeo/error.hpp"

namespace raogeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Beyond this log-ratio p f(q/p) is replaced by its q * slope_at_inf limit.
constexpr double kMaxLogRatio = 700.0;

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// Pointwise contributions, all in terms of log p and log q.

double f_term(const FGenerator& gen, double lp, double lq) {
  if (lp == kNegInf) {
    if (lq == kNegInf) return 0.0;
    const double q = std::exp(lq);
    return q == 0.0 ? 0.0 : q * gen.slope_at_inf;
  }
  const double p = std::exp(lp);
  if (p == 0.0) return 0.0;
  if (lq == kNegInf) return p * gen.value_at_0;
  const double t = lq - lp;
  if (t > kMaxLogRatio) return std::exp(lq) * gen.slope_at_inf;
  return p * gen.f_of_log(t);
}

double kl_term(double lp, double lq) {
  if (lp == kNegInf) return 0.0;
  const double p = std::exp(lp);
  if (lq == kNegInf) return p == 0.0 ? 0.0 : kInf;
  return p * (lp - lq);
}

double cross_entropy_term(double lp, double lq) {
  if (lp == kNegInf) return 0.0;
  const double p = std::exp(lp);
  if (lq == kNegInf) return p == 0.0 ? 0.0 : kInf;
  return -p * lq;
}

double bc_term(double lp, double lq) { return std::exp(0.5 * (lp + lq)); }

double hellinger_term(double lp, double lq) {
  const double d = std::exp(0.5 * lp) - std::exp(0.5 * lq);
  return 0.5 * d * d;
}

/// Two log-densities on a common sample space.
struct LogPair {
  std::function<double(double)> log_p;
  std::function<double(double)> log_q;
  bool lattice = false;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breakpoints;
};

template <class Term>
DivergenceValue accumulate(const LogPair& pair, Term term,
                           const QuadratureOptions& opts) {
  if (pair.lattice) {
    double total = 0.0;
    const long first = std::lround(pair.lo);
    const long last = std::lround(pair.hi);
    for (long k = first; k <= last; ++k) {
      const double x = static_cast<double>(k);
      total += term(pair.log_p(x), pair.log_q(x));
    }
    return DivergenceValue{total, 0.0, "series"};
  }
  bool infinite = false;
  auto integrand = [&](double x) {
    const double v = term(pair.log_p(x), pair.log_q(x));
    if (std::isinf(v)) {
      infinite = true;
      return 0.0;
    }
    return v;
  };
  const auto r = integrate_scalar(integrand, pair.lo, pair.hi, opts,
                                  pair.breakpoints, 4);
  if (infinite) return DivergenceValue{kInf, 0.0, "quadrature"};
  return DivergenceValue{r.value, r.error, "quadrature"};
}

template <class Term>
double accumulate(const DiscreteDist& p, const DiscreteDist& q, Term term) {
  if (p.size() != q.size())
    throw UsageError("discrete distributions have different alphabet sizes");
  double total = 0.0;
  for (int i = 0; i < p.size(); ++i) total += term(safe_log(p[i]), safe_log(q[i]));
  return total;
}

LogPair family_pair(const Family& family, const ParamPoint& p,
                    const ParamPoint& q) {
  family.validate(p);
  family.validate(q);
  const SupportWindow wp = family.window(p);
  const SupportWindow wq = family.window(q);
  LogPair pair;
  pair.log_p = [&family, p](double x) { return family.log_density(p, x); };
  pair.log_q = [&family, q](double x) { return family.log_density(q, x); };
  pair.lattice = wp.discrete;
  pair.lo = std::min(wp.lo, wq.lo);
  pair.hi = std::max(wp.hi, wq.hi);
  pair.breakpoints = wp.breakpoints;
  pair.breakpoints.insert(pair.breakpoints.end(), wq.breakpoints.begin(),
                          wq.breakpoints.end());
  return pair;
}

DivergenceValue with_method(DivergenceValue v, const Family& family) {
  if (v.method == "series" && family.name() != "poisson") v.method = "sum";
  return v;
}

}  // namespace

// --- generators --------------------------------------------------------------

FGenerator kl_generator() {
  return FGenerator{"kl",
                    [](double u) { return -std::log(u) + u - 1.0; },
                    [](double t) { return -t + std::expm1(t); },
                    kInf, 1.0, true};
}

FGenerator reverse_kl_generator() {
  return FGenerator{"rkl",
                    [](double u) { return u > 0.0 ? u * std::log(u) - u + 1.0 : 1.0; },
                    [](double t) { return std::exp(t) * t - std::expm1(t); },
                    1.0, kInf, true};
}

FGenerator hellinger_generator() {
  return FGenerator{"hellinger",
                    [](double u) {
                      const double d = std::sqrt(u) - 1.0;
                      return 2.0 * d * d;
                    },
                    [](double t) {
                      const double d = std::expm1(0.5 * t);
                      return 2.0 * d * d;
                    },
                    2.0, 2.0, true};
}

FGenerator total_variation_generator() {
  return FGenerator{"tv", [](double u) { return 0.5 * std::abs(u - 1.0); },
                    [](double t) { return 0.5 * std::abs(std::expm1(t)); },
                    0.5, 0.5, false};
}

FGenerator alpha_generator(double alpha) {
  if (!(std::abs(alpha) < 1.0))
    throw UsageError("alpha generator requires |alpha| < 1");
  const double c = 4.0 / (1.0 - alpha * alpha);
  const double lin = 2.0 / (1.0 - alpha);
  const double expo = 0.5 * (1.0 + alpha);
  std::ostringstream name;
  name << "alpha:" << alpha;
  return FGenerator{
      name.str(),
      [=](double u) { return c * (1.0 - std::pow(u, expo)) + lin * (u - 1.0); },
      [=](double t) { return -c * std::expm1(expo * t) + lin * std::expm1(t); },
      2.0 / (1.0 + alpha), lin, true};
}

FGenerator make_generator(const std::string& name) {
  if (name == "kl") return kl_generator();
  if (name == "rkl") return reverse_kl_generator();
  if (name == "hellinger") return hellinger_generator();
  if (name == "tv") return total_variation_generator();
  if (name.rfind("alpha:", 0) == 0) {
    try {
      std::size_t used = 0;
      const double a = std::stod(name.substr(6), &used);
      if (used == name.size() - 6) return alpha_generator(a);
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
    throw UsageError("malformed alpha generator '" + name + "'");
  }
  throw UsageError("unknown f-divergence generator '" + name +
                   "' (known: kl, rkl, hellinger, tv, alpha:A)");
}

std::vector<FGenerator> builtin_generators() {
  return {kl_generator(),        reverse_kl_generator(),
          hellinger_generator(), total_variation_generator(),
          alpha_generator(-0.5), alpha_generator(0.5)};
}

GeneratorCheck check_generator(const FGenerator& gen) {
  GeneratorCheck c;
  const double h1 = 1e-5;
  const double h2 = 1e-4;
  c.value = gen.f(1.0);
  c.slope = (gen.f(1.0 + h1) - gen.f(1.0 - h1)) / (2.0 * h1);
  c.curvature = (gen.f(1.0 + h2) - 2.0 * c.value + gen.f(1.0 - h2)) / (h2 * h2);
  c.ok = std::abs(c.value) < 1e-6;
  if (gen.smooth_at_one)
    c.ok = c.ok && std::abs(c.slope) < 1e-6 && std::abs(c.curvature - 1.0) < 1e-6;
  return c;
}

// --- discrete types ------------------------------------------------------------

DiscreteDist::DiscreteDist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw DomainError("empty probability vector");
  double sum = 0.0;
  for (double x : probs_) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw DomainError("probabilities must be finite and nonnegative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << sum << ", not 1";
    throw DomainError(msg.str());
  }
}

Partition::Partition(std::vector<std::vector<int>> bins, int alphabet_size)
    : bins_(std::move(bins)), m_(alphabet_size) {
  if (bins_.empty() || static_cast<int>(bins_.size()) > m_)
    throw UsageError("partition must have between 1 and m bins");
  std::vector<int> seen(static_cast<std::size_t>(m_), 0);
  for (const auto& bin : bins_) {
    if (bin.empty()) throw UsageError("partition bins must be non-empty");
    for (int i : bin) {
      if (i < 0 || i >= m_) throw UsageError("partition index out of range");
      if (seen[static_cast<std::size_t>(i)]++)
        throw UsageError("partition bins overlap");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw UsageError("partition does not cover the alphabet");
}

Partition Partition::singletons(int alphabet_size) {
  std::vector<std::vector<int>> bins;
  for (int i = 0; i < alphabet_size; ++i) bins.push_back({i});
  return Partition(std::move(bins), alphabet_size);
}

DiscreteDist coarse_grain(const DiscreteDist& p, const Partition& part) {
  if (part.alphabet_size() != p.size())
    throw UsageError("partition alphabet size does not match the distribution");
  std::vector<double> out;
  for (const auto& bin : part.bins()) {
    double s = 0.0;
    for (int i : bin) s += p[i];
    out.push_back(s);
  }
  return DiscreteDist(std::move(out));
}

// --- finite alphabets ------------------------------------------------------------

double f_divergence(const FGenerator& gen, const DiscreteDist& p,
                    const DiscreteDist& q) {
  return accumulate(p, q, [&](double lp, double lq) { return f_term(gen, lp, lq); });
}

double kl(const DiscreteDist& p, const DiscreteDist& q) {
  return accumulate(p, q, kl_term);
}

double reverse_kl(const DiscreteDist& p, const DiscreteDist& q) { return kl(q, p); }

double cross_entropy(const DiscreteDist& p, const DiscreteDist& q) {
  return accumulate(p, q, cross_entropy_term);
}

double shannon_entropy(const DiscreteDist& p) { return cross_entropy(p, p); }

double alpha_divergence(double alpha, const DiscreteDist& p,
                        const DiscreteDist& q) {
  if (std::abs(alpha + 1.0) < kAlphaGuardBand) return kl(p, q);
  if (std::abs(alpha - 1.0) < kAlphaGuardBand) return reverse_kl(p, q);
  const double a = 0.5 * (1.0 - alpha);
  const double b = 0.5 * (1.0 + alpha);
  const double overlap = accumulate(
      p, q, [&](double lp, double lq) { return std::exp(a * lp + b * lq); });
  return 4.0 / (1.0 - alpha * alpha) * (1.0 - overlap);
}

double bhattacharyya(const DiscreteDist& p, const DiscreteDist& q) {
  const double bc = accumulate(p, q, bc_term);
  return bc > 0.0 ? -std::log(bc) : kInf;
}

double hellinger_sq(const DiscreteDist& p, const DiscreteDist& q) {
  return accumulate(p, q, hellinger_term);
}

// --- family members ----------------------------------------------------------------

DivergenceValue f_divergence(const FGenerator& gen, const Family& family,
                             const ParamPoint& p, const ParamPoint& q,
                             const QuadratureOptions& opts) {
  return with_method(
      accumulate(family_pair(family, p, q),
                 [&](double lp, double lq) { return f_term(gen, lp, lq); }, opts),
      family);
}

DivergenceValue kl(const Family& family, const ParamPoint& p,
                   const ParamPoint& q, const QuadratureOptions& opts) {
  return with_method(accumulate(family_pair(family, p, q), kl_term, opts), family);
}

DivergenceValue reverse_kl(const Family& family, const ParamPoint& p,
                           const ParamPoint& q, const QuadratureOptions& opts) {
  return kl(family, q, p, opts);
}

DivergenceValue cross_entropy(const Family& family, const ParamPoint& p,
                              const ParamPoint& q,
                              const QuadratureOptions& opts) {
  return with_method(
      accumulate(family_pair(family, p, q), cross_entropy_term, opts), family);
}

DivergenceValue shannon_entropy(const Family& family, const ParamPoint& p,
                                const QuadratureOptions& opts) {
  return cross_entropy(family, p, p, opts);
}

DivergenceValue alpha_divergence(double alpha, const Family& family,
                                 const ParamPoint& p, const ParamPoint& q,
                                 const QuadratureOptions& opts) {
  if (std::abs(alpha + 1.0) < kAlphaGuardBand) return kl(family, p, q, opts);
  if (std::abs(alpha - 1.0) < kAlphaGuardBand) return reverse_kl(family, p, q, opts);
  const double a = 0.5 * (1.0 - alpha);
  const double b = 0.5 * (1.0 + alpha);
  DivergenceValue overlap = accumulate(
      family_pair(family, p, q),
      [&](double lp, double lq) { return std::exp(a * lp + b * lq); }, opts);
  const double scale = 4.0 / (1.0 - alpha * alpha);
  overlap.value = scale * (1.0 - overlap.value);
  overlap.residual *= scale;
  return with_method(overlap, family);
}

DivergenceValue bhattacharyya(const Family& family, const ParamPoint& p,
                              const ParamPoint& q, const QuadratureOptions& opts) {
  DivergenceValue bc = accumulate(family_pair(family, p, q), bc_term, opts);
  bc.residual = bc.value > 0.0 ? bc.residual / bc.value : kInf;
  bc.value = bc.value > 0.0 ? -std::log(bc.value) : kInf;
  return with_method(bc, family);
}

DivergenceValue hellinger_sq(const Family& family, const ParamPoint& p,
                             const ParamPoint& q, const QuadratureOptions& opts) {
  return with_method(accumulate(family_pair(family, p, q), hellinger_term, opts),
                     family);
}

double mahalanobis_sq(const Matrix& m, const Vector& x, const Vector& y) {
  if (m.rows() != m.cols() || m.rows() != x.size() || x.size() != y.size())
    throw UsageError("Mahalanobis operands have mismatched dimensions");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw DefinitenessError("Mahalanobis matrix is not symmetric", 0.0);
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw DefinitenessError("Mahalanobis matrix is not positive definite", 0.0);
  const Vector d = x - y;
  return d.dot(m * d);
}

// --- sample-space maps ---------------------------------------------------------

SampleSpaceMap identity_map() {
  return SampleSpaceMap{"identity", [](double x) { return x; },
                        [](double) { return 1.0; }, [](double y) { return y; }};
}

SampleSpaceMap affine_map(double a, double b) {
  if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b))
    throw UsageError("affine map needs a finite nonzero slope");
  std::ostringstream name;
  name << "affine(" << a << "," << b << ")";
  return SampleSpaceMap{name.str(), [a, b](double x) { return a * x + b; },
                        [a](double) { return a; },
                        [a, b](double y) { return (y - b) / a; }};
}

SampleSpaceMap cubic_map() {
  return SampleSpaceMap{
      "cubic", [](double x) { return x * x * x + x; },
      [](double x) { return 3.0 * x * x + 1.0; },
      [](double y) {
        // Cardano for x^3 + x - y = 0, polished by Newton.
        const double disc = std::sqrt(0.25 * y * y + 1.0 / 27.0);
        double x = std::cbrt(0.5 * y + disc) + std::cbrt(0.5 * y - disc);
        for (int i = 0; i < 3; ++i) x -= (x * x * x + x - y) / (3.0 * x * x + 1.0);
        return x;
      }};
}

InvarianceCheck pushforward_density_check(const Family& family,
                                          const SampleSpaceMap& map,
                                          const ParamPoint& p1,
                                          const ParamPoint& p2,
                                          const FGenerator& gen,
                                          const QuadratureOptions& opts) {
  if (family.is_discrete())
    throw UsageError("pushforward check needs a continuous family");
  const LogPair original = family_pair(family, p1, p2);

  constexpr int kGrid = 256;
  std::vector<double> xs;
  double sign = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double x = original.lo + (original.hi - original.lo) * i / kGrid;
    const double d = map.derivative(x);
    if (!std::isfinite(d) || std::abs(d) < 1e-12 || (sign != 0.0 && d * sign < 0.0))
      throw DomainError("map Jacobian vanishes or changes sign on the support");
    sign = d > 0.0 ? 1.0 : -1.0;
    xs.push_back(x);
  }
  std::vector<double> ys;
  for (double b : original.breakpoints) xs.push_back(b);
  for (double x : xs) ys.push_back(map.forward(x));

  LogPair image;
  auto pulled = [&map](const std::function<double(double)>& log_density) {
    return [&map, log_density](double y) {
      const double x = map.inverse(y);
      return log_density(x) - std::log(std::abs(map.derivative(x)));
    };
  };
  image.log_p = pulled(original.log_p);
  image.log_q = pulled(original.log_q);
  image.lattice = false;
  image.lo = *std::min_element(ys.begin(), ys.end());
  image.hi = *std::max_element(ys.begin(), ys.end());
  image.breakpoints = ys;

  auto term = [&](double lp, double lq) { return f_term(gen, lp, lq); };
  InvarianceCheck check;
  check.original = accumulate(original, term, opts).value;
  check.transformed = accumulate(image, term, opts).value;
  check.residual = std::abs(check.transformed - check.original);
  return check;
}

}  // namespace raogeo
