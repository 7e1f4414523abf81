#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "raogeo/error.hpp"
#include "raogeo/geodesics.hpp"

using namespace raogeo;

namespace {

ParamPoint pt(std::initializer_list<double> v, const std::string& chart) {
  return ParamPoint{make_vector(v), chart};
}

Vector v1(double a) { return make_vector({a}); }

ParamPoint random_gaussian(oracle::Gen& g, double smin = 0.3, double smax = 3.0) {
  return pt({g.uniform(-2, 2), g.uniform(smin, smax)}, "mu-sigma");
}

Vector random_gauss_theta(oracle::Gen& g) {
  const double mu = g.uniform(-2, 2), s = g.uniform(0.5, 2.0);
  return make_vector({mu / (s * s), -0.5 / (s * s)});
}

// Christoffel symbols of the first kind, Gamma_{k,ij}, recomputed from the metric by
// central differences with step h, for an oracle independent of the library.
std::vector<Matrix> fd_christoffel(const Family& f, const ParamPoint& th, double h) {
  const int d = th.dim();
  std::vector<Matrix> dg(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l) {
    ParamPoint a = th, b = th;
    a.coords(l) += h;
    b.coords(l) -= h;
    dg[static_cast<std::size_t>(l)] = (f.fisher_closed_form(a) - f.fisher_closed_form(b)) / (2 * h);
  }
  std::vector<Matrix> out(static_cast<std::size_t>(d), Matrix::Zero(d, d));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        out[static_cast<std::size_t>(k)](i, j) =
            0.5 * (dg[static_cast<std::size_t>(i)](k, j) + dg[static_cast<std::size_t>(j)](k, i) -
                   dg[static_cast<std::size_t>(k)](i, j));
  return out;
}

}  // namespace

TEST(Christoffel, VanishOnFlatCharts) {
  const auto p = make_poisson();
  const auto d = make_discrete(2);
  ChristoffelOptions fd;
  fd.prefer_analytic = false;
  for (double s : {0.7, 2.0, 5.0}) {
    const auto c = christoffel(*p, pt({s}, "sqrt"), fd);
    EXPECT_LT(std::abs(c(0, 0, 0)), 1e-9);
  }
  for (double phi : {0.5, 1.6, 2.6}) {
    const auto c = christoffel(*d, pt({phi}, "angle"), fd);
    EXPECT_LT(std::abs(c(0, 0, 0)), 1e-9);
  }
}

TEST(Christoffel, GaussianAnalyticAndFiniteDifferenceAgree) {
  oracle::Gen g(1);
  const auto f = make_gaussian1d();
  ChristoffelOptions fd;
  fd.prefer_analytic = false;
  for (int trial = 0; trial < 10; ++trial) {
    const ParamPoint th = random_gaussian(g);
    const auto a = christoffel(*f, th);
    const auto n = christoffel(*f, th, fd);
    EXPECT_EQ(a.method, "analytic");
    EXPECT_EQ(n.method, "finite-difference");
    const double s3 = std::pow(th.coords(1), 3);
    // g = diag(1/s^2, 2/s^2): Gamma_{mu,mu s} = -1/s^3, Gamma_{s,mu mu} = 1/s^3,
    // Gamma_{s,ss} = -2/s^3, all others zero.
    EXPECT_NEAR(a(0, 0, 1), -1.0 / s3, 1e-12);
    EXPECT_NEAR(a(0, 1, 0), -1.0 / s3, 1e-12);
    EXPECT_NEAR(a(1, 0, 0), 1.0 / s3, 1e-12);
    EXPECT_NEAR(a(1, 1, 1), -2.0 / s3, 1e-12);
    EXPECT_EQ(a(0, 0, 0), 0.0);
    EXPECT_EQ(a(0, 1, 1), 0.0);
    for (int k = 0; k < 2; ++k) EXPECT_LT((a.gamma[k] - n.gamma[k]).norm(), 1e-8);
  }
}

TEST(Christoffel, RichardsonConsistency) {
  oracle::Gen g(2);
  const auto f = make_gaussian1d();
  ChristoffelOptions fd;
  fd.prefer_analytic = false;
  for (int trial = 0; trial < 5; ++trial) {
    const ParamPoint th = random_gaussian(g, 0.5, 3.0);
    const auto c = christoffel(*f, th, fd);
    const auto h1 = fd_christoffel(*f, th, 1e-3), h2 = fd_christoffel(*f, th, 5e-4);
    for (int k = 0; k < 2; ++k) {
      const Matrix rich = (4.0 * h2[k] - h1[k]) / 3.0;
      EXPECT_LT((c.gamma[k] - rich).norm(), 1e-6);
    }
  }
}

TEST(Christoffel, SymmetricInLowerIndices) {
  oracle::Gen g(3);
  ChristoffelOptions fd;
  fd.prefer_analytic = false;
  const auto f = make_discrete(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = g.simplex(4, 0.05);
    const auto c = christoffel(*f, pt({p[0], p[1], p[2]}, "probs"), fd);
    for (const Matrix& m : c.gamma) EXPECT_LT((m - m.transpose()).norm(), 1e-10);
    const auto h = christoffel(*make_gaussian1d(), random_gaussian(g), fd);
    for (const Matrix& m : h.gamma) EXPECT_LT((m - m.transpose()).norm(), 1e-10);
  }
}

TEST(Shoot, ZeroVelocityIsConstant) {
  const auto f = make_gaussian1d();
  const ParamPoint th = pt({0.5, 1.5}, "mu-sigma");
  const GeodesicPath p = geodesic_shoot(*f, th, Vector::Zero(2), 64);
  EXPECT_EQ(p.length, 0.0);
  for (const auto& n : p.nodes) EXPECT_EQ(n.theta, th.coords);
}

TEST(Shoot, ShortHorizontalShotHasLengthDeltaMuOverSigma) {
  const auto f = make_gaussian1d();
  for (double sigma : {0.5, 1.0, 3.0}) {
    const double dmu = 1e-3 * sigma;
    const GeodesicPath p = geodesic_shoot(*f, pt({0.0, sigma}, "mu-sigma"), make_vector({dmu, 0.0}));
    EXPECT_NEAR(p.length, dmu / sigma, 1e-9);
    // The speed sqrt(v^T I v) is conserved along a geodesic.
    EXPECT_LT(p.speed_variation, 1e-8);
  }
}

TEST(Shoot, FourthOrderStepDoubling) {
  const auto f = make_gaussian1d();
  const ParamPoint th = pt({0.0, 1.0}, "mu-sigma");
  const Vector v0 = make_vector({1.5, 0.4});
  auto end = [&](int steps) { return geodesic_shoot(*f, th, v0, steps).nodes.back().theta; };
  const Vector a = end(20), b = end(40), c = end(80);
  const double ratio = (a - b).norm() / (b - c).norm();
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(Shoot, ExitsDomain) {
  // sqrt(lambda) moves linearly along a Poisson geodesic and reaches 0 at t = 1/2.
  const auto p = make_poisson();
  const auto f = make_gaussian1d();
  try {
    geodesic_shoot(*p, pt({1.0}, "lambda"), make_vector({-4.0}), 64);
    FAIL() << "expected GeodesicExitError";
  } catch (const GeodesicExitError& e) {
    EXPECT_GT(e.exit_time(), 0.0);
    EXPECT_LT(e.exit_time(), 1.0);
  }
  EXPECT_THROW(geodesic_shoot(*f, pt({0.0, 1.0}, "mu-sigma"), make_vector({1.0, 0.0}), 8),
               UsageError);
}

TEST(Connect, IdenticalEndpoints) {
  const auto f = make_gaussian1d();
  const GeodesicPath p = geodesic_connect(*f, pt({0.3, 1.1}, "mu-sigma"), pt({0.3, 1.1}, "mu-sigma"));
  EXPECT_EQ(p.length, 0.0);
  EXPECT_EQ(rao_distance_numeric(*f, pt({1, 2}, "mu-sigma"), pt({1, 2}, "mu-sigma")), 0.0);
}

TEST(Connect, EqualMeansIsLogRatio) {
  const auto f = make_gaussian1d();
  const ParamPoint a = pt({0.0, 1.0}, "mu-sigma"), b = pt({0.0, std::numbers::e}, "mu-sigma");
  EXPECT_NEAR(rao_distance_numeric(*f, a, b), std::numbers::sqrt2, 1e-6);
  EXPECT_NEAR(rao_distance_gaussian_hyperbolic(a, b), std::numbers::sqrt2, 1e-12);
}

TEST(Connect, EqualSigmasFollowsHyperbolicGeodesic) {
  // The geodesic between equal-sigma points bows upward, so the distance is
  // strictly shorter than the horizontal-path length |dmu|/sigma.
  const auto f = make_gaussian1d();
  const ParamPoint a = pt({0.0, 1.0}, "mu-sigma"), b = pt({1.0, 1.0}, "mu-sigma");
  const double oracle = oracle::gaussian_rao(0, 1, 1, 1);
  EXPECT_NEAR(oracle, std::numbers::sqrt2 * 2.0 * std::asinh(1.0 / (2.0 * std::numbers::sqrt2)),
              1e-14);
  const GeodesicPath p = geodesic_connect(*f, a, b);
  EXPECT_NEAR(p.length, oracle, 1e-6);
  EXPECT_NEAR(rao_distance_gaussian_hyperbolic(a, b), oracle, 1e-12);
  EXPECT_LT(p.length, 1.0);
  double top = 0.0;
  for (const auto& n : p.nodes) top = std::max(top, n.theta(1));
  EXPECT_GT(top, 1.05);
  // Small separations approach |dmu| / sigma.
  const ParamPoint c = pt({1e-3, 1.0}, "mu-sigma");
  EXPECT_NEAR(rao_distance_gaussian_hyperbolic(a, c), 1e-3, 1e-10);
}

TEST(Connect, AgreesWithHyperbolicOnRandomPairs) {
  oracle::Gen g(4);
  const auto f = make_gaussian1d();
  for (int trial = 0; trial < 50; ++trial) {
    const double mu1 = g.uniform(-3, 3), mu2 = g.uniform(-3, 3);
    const double s1 = std::exp(g.uniform(std::log(0.1), std::log(10.0)));
    const double s2 = std::exp(g.uniform(std::log(0.1), std::log(10.0)));
    const ParamPoint a = pt({mu1, s1}, "mu-sigma"), b = pt({mu2, s2}, "mu-sigma");
    const double ode = rao_distance_numeric(*f, a, b);
    const double hyp = rao_distance_gaussian_hyperbolic(a, b);
    EXPECT_NEAR(ode, hyp, 1e-4) << mu1 << " " << s1 << " " << mu2 << " " << s2;
    EXPECT_NEAR(hyp, oracle::gaussian_rao(mu1, s1, mu2, s2), 1e-10 * std::max(1.0, hyp));
  }
}

TEST(Connect, OtherChartsGiveSameDistance) {
  const auto f = make_gaussian1d();
  const ParamPoint a = pt({0.2, 0.8}, "mu-sigma"), b = pt({-0.6, 1.7}, "mu-sigma");
  const double base = rao_distance_gaussian_hyperbolic(a, b);
  for (const std::string c : {"mu-sigmasq", "natural"}) {
    const ParamPoint ac = reparameterize(*f, a, c), bc = reparameterize(*f, b, c);
    EXPECT_NEAR(rao_distance_numeric(*f, ac, bc), base, 1e-6) << c;
    EXPECT_NEAR(rao_distance_gaussian_hyperbolic(ac, bc), base, 1e-12) << c;
  }
}

TEST(Connect, SymmetricAndConstantSpeed) {
  oracle::Gen g(5);
  const auto f = make_gaussian1d();
  for (int trial = 0; trial < 10; ++trial) {
    const ParamPoint a = random_gaussian(g), b = random_gaussian(g);
    const GeodesicPath ab = geodesic_connect(*f, a, b), ba = geodesic_connect(*f, b, a);
    EXPECT_NEAR(ab.length, ba.length, 1e-8);
    EXPECT_LT(ab.endpoint_residual, 1e-10);
    EXPECT_LT(ab.speed_variation, 1e-2);
    const auto [lo, hi] = std::minmax_element(ab.speeds.begin(), ab.speeds.end());
    EXPECT_LT(*hi - *lo, 1e-2 * ab.length);
  }
}

TEST(Connect, TriangleInequality) {
  oracle::Gen g(6);
  const auto f = make_gaussian1d();
  for (int trial = 0; trial < 200; ++trial) {
    const ParamPoint a = random_gaussian(g), b = random_gaussian(g), c = random_gaussian(g);
    const double ab = rao_distance_numeric(*f, a, b), bc = rao_distance_numeric(*f, b, c),
                 ac = rao_distance_numeric(*f, a, c);
    EXPECT_GE(ab + bc - ac, -1e-6);
  }
}

TEST(Connect, PoissonAndDiscreteClosedForms) {
  const auto p = make_poisson();
  for (auto [l1, l2] : {std::pair{1.0, 4.0}, std::pair{0.3, 9.0}, std::pair{5.0, 2.0}}) {
    const ParamPoint a = pt({l1}, "lambda"), b = pt({l2}, "lambda");
    const double exact = 2.0 * std::abs(std::sqrt(l2) - std::sqrt(l1));
    EXPECT_NEAR(rao_distance_closed_form(*p, a, b), exact, 1e-14);
    EXPECT_NEAR(rao_distance_numeric(*p, a, b), exact, 1e-6);
  }
  const auto d = make_discrete(3);
  const ParamPoint a = pt({0.2, 0.5}, "probs"), b = pt({0.6, 0.1}, "probs");
  const double bc = std::sqrt(0.2 * 0.6) + std::sqrt(0.5 * 0.1) + std::sqrt(0.3 * 0.3);
  EXPECT_NEAR(rao_distance_closed_form(*d, a, b), 2.0 * std::acos(bc), 1e-14);
  EXPECT_NEAR(rao_distance_numeric(*d, a, b), 2.0 * std::acos(bc), 1e-6);
}

TEST(Connect, ReportsSolverFailure) {
  const auto f = make_gaussian1d();
  ConnectOptions o;
  o.max_iter = 1;
  o.tol = 1e-15;
  try {
    geodesic_connect(*f, pt({-3.0, 0.2}, "mu-sigma"), pt({3.0, 0.2}, "mu-sigma"), o);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(DualGeodesics, PoissonMidpoints) {
  const auto s = make_poisson_expfam();
  const Vector e = e_geodesic(*s, v1(std::log(2.0)), v1(std::log(8.0)), 0.5);
  EXPECT_NEAR(e(0), std::log(4.0), 1e-15);
  const Vector m = m_geodesic(*s, v1(2.0), v1(8.0), 0.5);
  EXPECT_NEAR(m(0), 5.0, 1e-15);
  EXPECT_GT(std::abs(m(0) - std::exp(e(0))), 0.5);
  EXPECT_EQ(e_geodesic(*s, v1(0.1), v1(0.9), 0.0)(0), 0.1);
  EXPECT_EQ(e_geodesic(*s, v1(0.1), v1(0.9), 1.0)(0), 0.9);
  EXPECT_EQ(m_geodesic(*s, v1(3.0), v1(7.0), 1.0)(0), 7.0);
  EXPECT_THROW(e_geodesic(*s, v1(0.1), v1(0.9), 1.5), UsageError);
  EXPECT_THROW(m_geodesic(*s, v1(-1.0), v1(2.0), 0.5), DomainError);
}

TEST(DualGeodesics, GaussianStaysInDomain) {
  const auto s = make_gaussian_expfam();
  const Vector a = make_vector({0.0, -0.5}), b = make_vector({2.0, -2.0});
  for (double l : {0.25, 0.5, 0.75}) {
    EXPECT_TRUE(s->in_natural_domain(e_geodesic(*s, a, b, l)));
    EXPECT_TRUE(s->in_expectation_range(
        m_geodesic(*s, to_expectation(*s, a), to_expectation(*s, b), l)));
  }
}

TEST(Cosine, DegenerateAndRandomTriples) {
  oracle::Gen g(7);
  const auto pois = make_poisson_expfam();
  const auto gauss = make_gaussian_expfam();
  const Vector q = v1(0.4);
  const CosineRelation z = cosine_relation(*pois, q, q, v1(1.2));
  EXPECT_NEAR(z.lhs, 0.0, 1e-15);
  EXPECT_EQ(z.rhs, 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    EXPECT_LT(cosine_residual(*pois, v1(g.uniform(-2, 3)), v1(g.uniform(-2, 3)), v1(g.uniform(-2, 3))),
              1e-8);
    EXPECT_LT(cosine_residual(*gauss, random_gauss_theta(g), random_gauss_theta(g),
                              random_gauss_theta(g)),
              1e-8);
  }
}

TEST(Cosine, LhsMatchesBregmanOracle) {
  const auto pois = make_poisson_expfam();
  // D(p:q) = B_F(theta_p : theta_q) = e^p - e^q - (p - q) e^q.
  auto d = [](double a, double b) { return std::exp(a) - std::exp(b) - (a - b) * std::exp(b); };
  const double p = 0.3, q = -0.5, r = 1.1;
  const CosineRelation c = cosine_relation(*pois, v1(p), v1(q), v1(r));
  EXPECT_NEAR(c.lhs, d(p, q) + d(q, r) - d(p, r), 1e-14);
  EXPECT_NEAR(c.rhs, (p - q) * (std::exp(r) - std::exp(q)), 1e-14);
}

TEST(Cosine, PythagoreanCase) {
  oracle::Gen g(8);
  const auto gauss = make_gaussian_expfam();
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector q = random_gauss_theta(g);
    const Vector u = make_vector({g.uniform(-1, 1), g.uniform(-1, 1)});
    const Vector w = make_vector({g.uniform(-1, 1), g.uniform(-1, 1)});
    OrthogonalTriple tri;
    double s = 0.2;
    bool built = false;
    for (int tries = 0; tries < 10 && !built; ++tries, s *= 0.5) {
      try {
        tri = orthogonal_triple(*gauss, q, u, w, 0.05, s);
        built = true;
      } catch (const DomainError&) {
      }
    }
    if (!built) continue;
    ++checked;
    const double dpq = bregman(*gauss, tri.p, tri.q), dqr = bregman(*gauss, tri.q, tri.r),
                 dpr = bregman(*gauss, tri.p, tri.r);
    EXPECT_NEAR(dpr, dpq + dqr, 1e-8);
    const Vector eta_q = to_expectation(*gauss, tri.q);
    EXPECT_NEAR((tri.p - tri.q).dot(to_expectation(*gauss, tri.r) - eta_q), 0.0, 1e-8);
  }
  EXPECT_GE(checked, 90);
}

TEST(Tangent, Examples) {
  const ParamPoint at = pt({0.0, 1.0}, "mu-sigma");
  const MetricTensor id(at, Matrix::Identity(2, 2), "analytic");
  const Vector p = make_vector({1.0, 2.0}), q = make_vector({4.0, -2.0});
  EXPECT_NEAR(tangent_embed(id, p, q), 25.0, 1e-13);
  EXPECT_EQ(tangent_embed(id, p, p), 0.0);
  EXPECT_EQ(tangent_quadratic_form(id, p, p), 0.0);
}

TEST(Tangent, RoutesAgreeOnRandomSpd) {
  oracle::Gen g(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = g.integer(1, 6);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = g.uniform(-1, 1);
    Matrix m = a * a.transpose() + 0.3 * Matrix::Identity(d, d);
    m = 0.5 * (m + m.transpose());
    ParamPoint at{Vector::Zero(d), "x"};
    const MetricTensor metric(at, m, "test");
    Vector p(d), q(d);
    for (int i = 0; i < d; ++i) {
      p(i) = g.uniform(-1, 1);
      q(i) = g.uniform(-1, 1);
    }
    const double quad = tangent_quadratic_form(metric, p, q);
    EXPECT_NEAR(tangent_embed(metric, p, q), quad, 1e-12 * std::max(1.0, quad));
    const Vector c = tangent_coordinates(metric, p - q);
    EXPECT_NEAR(c.squaredNorm(), quad, 1e-12 * std::max(1.0, quad));
  }
}
