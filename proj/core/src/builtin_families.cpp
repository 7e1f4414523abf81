#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "raogeo/error.hpp"
#include "raogeo/families.hpp"

namespace raogeo {

namespace {

constexpr double kTailMass = 1e-14;
constexpr double kGaussianHalfWidth = 12.0;  // sigmas

bool is_integer(double x) { return std::isfinite(x) && std::floor(x) == x; }

// ---------------------------------------------------------------------------

class Gaussian1d final : public Family {
 public:
  Gaussian1d() : Family("gaussian1d", 2, "mu-sigma") {
    add_identity_chart("mu-sigma");
    add_chart(Chart{
        "mu-sigmasq",
        [](const Vector& c) { return make_vector({c(0), std::sqrt(c(1))}); },
        [](const Vector& b) { return make_vector({b(0), b(1) * b(1)}); },
        [](const Vector& c) {
          Matrix j = Matrix::Zero(2, 2);
          j(0, 0) = 1.0;
          j(1, 1) = 0.5 / std::sqrt(c(1));
          return j;
        },
        [](const Vector& c) { return c(1) > 0.0; }});
    add_chart(Chart{
        "natural",
        [](const Vector& c) {
          return make_vector({-c(0) / (2.0 * c(1)), 1.0 / std::sqrt(-2.0 * c(1))});
        },
        [](const Vector& b) {
          const double var = b(1) * b(1);
          return make_vector({b(0) / var, -0.5 / var});
        },
        [](const Vector& c) {
          Matrix j = Matrix::Zero(2, 2);
          j(0, 0) = -0.5 / c(1);
          j(0, 1) = c(0) / (2.0 * c(1) * c(1));
          j(1, 1) = std::pow(-2.0 * c(1), -1.5);
          return j;
        },
        [](const Vector& c) { return c(1) < 0.0; }});
    add_chart(Chart{
        "expectation",
        [](const Vector& c) {
          return make_vector({c(0), std::sqrt(c(1) - c(0) * c(0))});
        },
        [](const Vector& b) {
          return make_vector({b(0), b(0) * b(0) + b(1) * b(1)});
        },
        [](const Vector& c) {
          const double sigma = std::sqrt(c(1) - c(0) * c(0));
          Matrix j = Matrix::Zero(2, 2);
          j(0, 0) = 1.0;
          j(1, 0) = -c(0) / sigma;
          j(1, 1) = 0.5 / sigma;
          return j;
        },
        [](const Vector& c) { return c(1) - c(0) * c(0) > 0.0; }});
  }

  bool is_discrete() const override { return false; }
  bool in_support(double x) const override { return std::isfinite(x); }

  std::optional<std::vector<Matrix>> closed_form_christoffel(
      const ParamPoint& theta) const override {
    if (theta.chart != "mu-sigma") return std::nullopt;
    validate(theta);
    const double s3 = std::pow(theta.coords(1), 3);
    std::vector<Matrix> gamma(2, Matrix::Zero(2, 2));
    gamma[0](0, 1) = gamma[0](1, 0) = -1.0 / s3;
    gamma[1](0, 0) = 1.0 / s3;
    gamma[1](1, 1) = -2.0 / s3;
    return gamma;
  }

 protected:
  bool in_base_domain(const Vector& b) const override { return b(1) > 0.0; }

  double log_density_base(const Vector& b, double x) const override {
    const double z = (x - b(0)) / b(1);
    return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(b(1)) -
           0.5 * z * z;
  }

  Vector score_base(const Vector& b, double x) const override {
    const double s = b(1);
    const double d = x - b(0);
    return make_vector({d / (s * s), -1.0 / s + d * d / (s * s * s)});
  }

  Matrix fisher_base(const Vector& b) const override {
    const double inv = 1.0 / (b(1) * b(1));
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = inv;
    m(1, 1) = 2.0 * inv;
    return m;
  }

  double cdf_base(const Vector& b, double x) const override {
    return 0.5 * std::erfc(-(x - b(0)) / (b(1) * std::numbers::sqrt2));
  }

  SupportWindow window_base(const Vector& b) const override {
    SupportWindow w;
    w.discrete = false;
    w.lo = b(0) - kGaussianHalfWidth * b(1);
    w.hi = b(0) + kGaussianHalfWidth * b(1);
    for (int k = -6; k <= 6; k += 2) w.breakpoints.push_back(b(0) + k * b(1));
    return w;
  }

  // Box-Muller; each pair of uniforms yields two normals.
  void draw_base(const Vector& b, Rng& rng,
                 std::span<double> out) const override {
    std::size_t i = 0;
    while (i < out.size()) {
      const double r = std::sqrt(-2.0 * std::log(rng.uniform_open()));
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      out[i++] = b(0) + b(1) * r * std::cos(phi);
      if (i < out.size()) out[i++] = b(0) + b(1) * r * std::sin(phi);
    }
  }
};

// ---------------------------------------------------------------------------

class Poisson final : public Family {
 public:
  Poisson() : Family("poisson", 1, "lambda") {
    add_identity_chart("lambda");
    add_chart(Chart{
        "natural",
        [](const Vector& c) { return make_vector({std::exp(c(0))}); },
        [](const Vector& b) { return make_vector({std::log(b(0))}); },
        [](const Vector& c) {
          Matrix j(1, 1);
          j(0, 0) = std::exp(c(0));
          return j;
        },
        [](const Vector& c) { return std::isfinite(std::exp(c(0))) && std::exp(c(0)) > 0.0; }});
    add_identity_chart("expectation");
    add_chart(Chart{
        "sqrt",
        [](const Vector& c) { return make_vector({0.25 * c(0) * c(0)}); },
        [](const Vector& b) { return make_vector({2.0 * std::sqrt(b(0))}); },
        [](const Vector& c) {
          Matrix j(1, 1);
          j(0, 0) = 0.5 * c(0);
          return j;
        },
        [](const Vector& c) { return c(0) > 0.0; }});
  }

  bool is_discrete() const override { return true; }
  bool in_support(double x) const override { return is_integer(x) && x >= 0.0; }

 protected:
  bool in_base_domain(const Vector& b) const override { return b(0) > 0.0; }

  double log_density_base(const Vector& b, double x) const override {
    // -lambda + log(lambda^x / x!)
    return -b(0) + x * std::log(b(0)) - std::lgamma(x + 1.0);
  }

  Vector score_base(const Vector& b, double x) const override {
    return make_vector({-1.0 + x / b(0)});
  }

  Matrix fisher_base(const Vector& b) const override {
    Matrix m(1, 1);
    m(0, 0) = 1.0 / b(0);
    return m;
  }

  double cdf_base(const Vector& b, double x) const override {
    if (x < 0.0) return 0.0;
    return boost::math::gamma_q(std::floor(x) + 1.0, b(0));
  }

  SupportWindow window_base(const Vector& b) const override {
    const double lambda = b(0);
    // Walk past the mode until p_k * r / (1 - r) < tail, r = lambda / (k+1).
    double k = std::floor(lambda);
    for (;; k += 1.0) {
      const double r = lambda / (k + 1.0);
      if (r < 1.0) {
        const double log_pk = -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
        if (std::exp(log_pk) * r / (1.0 - r) < kTailMass) break;
      }
    }
    // Lower truncation only matters for large lambda.
    double lo = 0.0;
    if (lambda > 50.0) {
      lo = std::max(0.0, std::floor(lambda - 12.0 * std::sqrt(lambda)));
    }
    SupportWindow w;
    w.discrete = true;
    w.lo = lo;
    w.hi = k;
    return w;
  }

  // Sequential-search inversion. Large means start at the mode so the walk
  // stays O(sqrt(lambda)) and exp(-lambda) cannot underflow.
  void draw_base(const Vector& b, Rng& rng,
                 std::span<double> out) const override {
    const double lambda = b(0);
    if (lambda < 500.0) {
      const double p0 = std::exp(-lambda);
      for (double& x : out) {
        const double u = rng.uniform();
        double k = 0.0;
        double p = p0;
        double cum = p0;
        while (u > cum && p > 0.0) {
          k += 1.0;
          p *= lambda / k;
          cum += p;
        }
        x = k;
      }
      return;
    }
    const double mode = std::floor(lambda);
    const double p_mode =
        std::exp(-lambda + mode * std::log(lambda) - std::lgamma(mode + 1.0));
    const double cdf_mode = boost::math::gamma_q(mode + 1.0, lambda);
    for (double& x : out) {
      const double u = rng.uniform();
      double k = mode;
      double p = p_mode;
      double cum = cdf_mode;
      if (u <= cum) {
        while (k > 0.0 && u <= cum - p) {
          cum -= p;
          p *= k / lambda;
          k -= 1.0;
        }
      } else {
        while (u > cum && p > 0.0) {
          k += 1.0;
          p *= lambda / k;
          cum += p;
        }
      }
      x = k;
    }
  }
};

// ---------------------------------------------------------------------------

class Discrete final : public Family {
 public:
  explicit Discrete(int m)
      : Family("discrete:" + std::to_string(m), m - 1, "probs"), m_(m) {
    add_identity_chart("probs");
    add_identity_chart("expectation");
    add_chart(Chart{
        "natural",
        [](const Vector& c) {
          const double shift = std::max(0.0, c.maxCoeff());
          const Vector e = (c.array() - shift).exp().matrix();
          const double denom = std::exp(-shift) + e.sum();
          return Vector(e / denom);
        },
        [](const Vector& b) {
          const double last = 1.0 - b.sum();
          return Vector((b.array() / last).log().matrix());
        },
        [](const Vector& c) {
          const double shift = std::max(0.0, c.maxCoeff());
          const Vector e = (c.array() - shift).exp().matrix();
          const Vector p = e / (std::exp(-shift) + e.sum());
          Matrix j = -p * p.transpose();
          j.diagonal() += p;
          return j;
        },
        [](const Vector& c) { return c.allFinite(); }});
    if (m == 2) {
      add_chart(Chart{
          "angle",
          [](const Vector& c) {
            const double s = std::sin(0.5 * c(0));
            return make_vector({s * s});
          },
          [](const Vector& b) {
            return make_vector({2.0 * std::asin(std::sqrt(b(0)))});
          },
          [](const Vector& c) {
            Matrix j(1, 1);
            j(0, 0) = 0.5 * std::sin(c(0));
            return j;
          },
          [](const Vector& c) {
            return c(0) > 0.0 && c(0) < std::numbers::pi;
          }});
    }
  }

  bool is_discrete() const override { return true; }
  bool in_support(double x) const override {
    return is_integer(x) && x >= 1.0 && x <= static_cast<double>(m_);
  }

 protected:
  bool in_base_domain(const Vector& b) const override {
    return (b.array() > 0.0).all() && 1.0 - b.sum() > 0.0;
  }

  double prob(const Vector& b, int letter) const {
    return letter == m_ ? 1.0 - b.sum() : b(letter - 1);
  }

  double log_density_base(const Vector& b, double x) const override {
    return std::log(prob(b, static_cast<int>(x)));
  }

  Vector score_base(const Vector& b, double x) const override {
    const int letter = static_cast<int>(x);
    if (letter == m_) return Vector::Constant(m_ - 1, -1.0 / prob(b, m_));
    Vector s = Vector::Zero(m_ - 1);
    s(letter - 1) = 1.0 / b(letter - 1);
    return s;
  }

  Matrix fisher_base(const Vector& b) const override {
    Matrix m = Matrix::Constant(m_ - 1, m_ - 1, 1.0 / prob(b, m_));
    m.diagonal() += (1.0 / b.array()).matrix();
    return m;
  }

  double cdf_base(const Vector& b, double x) const override {
    if (x < 1.0) return 0.0;
    const int top = std::min(m_, static_cast<int>(std::floor(x)));
    if (top == m_) return 1.0;
    return b.head(top).sum();
  }

  SupportWindow window_base(const Vector&) const override {
    SupportWindow w;
    w.discrete = true;
    w.lo = 1.0;
    w.hi = m_;
    return w;
  }

  void draw_base(const Vector& b, Rng& rng,
                 std::span<double> out) const override {
    for (double& x : out) {
      const double u = rng.uniform();
      double cum = 0.0;
      int letter = m_;
      for (int i = 1; i < m_; ++i) {
        cum += b(i - 1);
        if (u < cum) {
          letter = i;
          break;
        }
      }
      x = letter;
    }
  }

 private:
  int m_;
};

}  // namespace

FamilyPtr make_gaussian1d() { return std::make_shared<const Gaussian1d>(); }
FamilyPtr make_poisson() { return std::make_shared<const Poisson>(); }

FamilyPtr make_discrete(int m) {
  if (m < 2) throw UsageError("discrete family needs m >= 2 letters");
  return std::make_shared<const Discrete>(m);
}

FamilyPtr make_family(const std::string& name) {
  if (name == "gaussian1d") return make_gaussian1d();
  if (name == "poisson") return make_poisson();
  const std::string prefix = "discrete:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string tail = name.substr(prefix.size());
    std::size_t used = 0;
    int m = 0;
    try {
      m = std::stoi(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size())
      throw UsageError("malformed discrete family '" + name + "'");
    return make_discrete(m);
  }
  throw UsageError("unknown family '" + name +
                   "' (known: gaussian1d, poisson, discrete:m)");
}

}  // namespace raogeo
