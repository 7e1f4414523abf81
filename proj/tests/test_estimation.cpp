#include <cmath>

#include <gtest/gtest.h>

#include "raogeo/error.hpp"
#include "raogeo/estimation.hpp"

using namespace raogeo;

namespace {

ParamPoint pt(std::initializer_list<double> v, const std::string& chart) {
  return ParamPoint{make_vector(v), chart};
}

Matrix diag(std::initializer_list<double> v) { return make_vector(v).asDiagonal(); }

}  // namespace

TEST(Crlb, PoissonExample) {
  const auto f = make_poisson();
  EXPECT_NEAR(crlb(*f, pt({3.0}, "lambda"), 10)(0, 0), 0.3, 1e-14);
}

TEST(Crlb, GaussianVarianceChart) {
  const auto f = make_gaussian1d();
  EXPECT_LT((crlb(*f, pt({0.0, 1.0}, "mu-sigmasq"), 1) - diag({1.0, 2.0})).norm(), 1e-12);
  EXPECT_LT((crlb(*f, pt({0.0, 1.5}, "mu-sigmasq"), 3) - diag({0.5, 1.5})).norm(), 1e-12);
}

TEST(Crlb, DoublingSampleSizeHalves) {
  const auto f = make_gaussian1d();
  const ParamPoint th = pt({0.3, 1.7}, "mu-sigma");
  EXPECT_LT((crlb(*f, th, 14) - 0.5 * crlb(*f, th, 7)).norm(), 1e-14);
}

TEST(Crlb, BlockWithKnownCoordinates) {
  const auto f = make_gaussian1d();
  const int mu[] = {0};
  EXPECT_NEAR(crlb_block(*f, pt({0.0, 1.0}, "mu-sigma"), 50, mu)(0, 0), 1.0 / 50.0, 1e-15);
}

TEST(Crlb, RejectsBadInput) {
  const auto f = make_poisson();
  EXPECT_THROW(crlb(*f, pt({3.0}, "lambda"), 0), UsageError);
  EXPECT_THROW(crlb(*f, pt({-3.0}, "lambda"), 4), DomainError);
}

TEST(Loewner, Examples) {
  const Matrix a = diag({2.0, 5.0});
  EXPECT_TRUE(loewner_geq(a, a, 0.0));
  EXPECT_FALSE(loewner_geq(diag({2.0, 2.0}), diag({1.0, 3.0}), 0.5));
  EXPECT_TRUE(loewner_geq(diag({2.0, 2.0}), diag({1.0, 3.0}), 1.0));
  EXPECT_TRUE(loewner_geq(diag({3.0, 3.0}), diag({1.0, 3.0}), 0.0));
}

TEST(Loewner, RejectsAsymmetric) {
  Matrix a = diag({1.0, 1.0});
  a(0, 1) = 1e-6;
  EXPECT_THROW(loewner_geq(a, diag({1.0, 1.0}), 1.0), DefinitenessError);
  EXPECT_THROW(loewner_geq(diag({1.0}), diag({1.0, 1.0}), 1.0), UsageError);
}

TEST(MonteCarlo, PoissonMeanAttainsBound) {
  const auto f = make_poisson();
  const ParamPoint th = pt({3.0}, "lambda");
  const auto est = make_estimator(*f, "mean", th);
  const EstimatorReport r = monte_carlo_report(*f, th, est, 100, 100000, 20240);
  EXPECT_NEAR(r.empirical_cov(0, 0), 0.03, 0.02 * 0.03);
  EXPECT_NEAR(r.crlb_matrix(0, 0), 0.03, 1e-15);
  EXPECT_GE(r.loewner_slack, -3.0 * r.loewner_slack_se);
  EXPECT_TRUE(loewner_geq(r.empirical_cov, r.crlb_matrix, 3.0 * r.loewner_slack_se));
  EXPECT_GE(r.efficiency(0), 0.97);
  EXPECT_LE(r.efficiency(0), 1.03);
  EXPECT_LT(r.bias_norm, 4.0 * std::sqrt(r.empirical_cov(0, 0)) / std::sqrt(1e5));
  EXPECT_EQ(r.regularity, "asserted");
}

TEST(MonteCarlo, GaussianMeanKnownSigma) {
  const auto f = make_gaussian1d();
  const ParamPoint th = pt({0.0, 1.0}, "mu-sigma");
  const auto est = make_estimator(*f, "mean", th);
  const EstimatorReport r = monte_carlo_report(*f, th, est, 50, 100000, 5);
  ASSERT_EQ(r.empirical_cov.rows(), 1);
  EXPECT_NEAR(r.empirical_cov(0, 0), 1.0 / 50.0, 0.02 / 50.0);
  EXPECT_GE(r.efficiency(0), 0.97);
  EXPECT_LE(r.efficiency(0), 1.03);
  EXPECT_GE(r.loewner_slack, -3.0 * r.loewner_slack_se);
  EXPECT_LT(r.bias_norm, 4.0 * std::sqrt(r.empirical_cov(0, 0)) / std::sqrt(1e5));
}

TEST(MonteCarlo, GaussianMeanAndVariance) {
  const auto f = make_gaussian1d();
  const ParamPoint th = pt({1.0, 2.0}, "mu-sigmasq");
  const auto est = make_estimator(*f, "mean-var", th);
  const long n = 40, reps = 20000;
  const EstimatorReport r = monte_carlo_report(*f, th, est, n, reps, 6);
  // The unbiased sample variance has variance 2 s^4 / (n - 1), just above the bound.
  EXPECT_NEAR(r.empirical_cov(1, 1), 2.0 * 4.0 / (n - 1), 0.05 * 8.0 / (n - 1));
  EXPECT_GE(r.loewner_slack, -3.0 * r.loewner_slack_se);
  double sd = std::sqrt(r.empirical_cov.diagonal().maxCoeff());
  EXPECT_LT(r.bias_norm, 4.0 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST(MonteCarlo, FirstObservationIsStrictlyDominated) {
  const auto f = make_poisson();
  const ParamPoint th = pt({3.0}, "lambda");
  const auto est = make_estimator(*f, "first", th);
  const EstimatorReport r = monte_carlo_report(*f, th, est, 100, 20000, 9);
  // Var of one draw is lambda, independent of n.
  EXPECT_NEAR(r.empirical_cov(0, 0), 3.0, 0.05 * 3.0);
  EXPECT_GT(r.empirical_cov(0, 0) - r.crlb_matrix(0, 0), 5.0 * r.variance_se(0));
  EXPECT_TRUE(loewner_geq(r.empirical_cov, r.crlb_matrix, 0.0));
}

TEST(MonteCarlo, DiscreteFrequencies) {
  const auto f = make_discrete(3);
  const ParamPoint th = pt({0.2, 0.5}, "probs");
  const auto est = make_estimator(*f, "freq", th);
  const EstimatorReport r = monte_carlo_report(*f, th, est, 60, 20000, 10);
  // Multinomial frequencies are efficient: cov = (diag(p) - p p^T) / n.
  EXPECT_LT((r.empirical_cov - r.crlb_matrix).norm(), 0.05 * r.crlb_matrix.norm());
  EXPECT_GE(r.loewner_slack, -3.0 * r.loewner_slack_se);
}

TEST(MonteCarlo, ConstantEstimatorShowsUnbiasednessIsNeeded) {
  const auto f = make_poisson();
  const ParamPoint th = pt({3.0}, "lambda");
  const auto at = make_estimator(*f, "constant", th);
  const EstimatorReport r = monte_carlo_report(*f, th, at, 10, 1000, 1);
  EXPECT_EQ(r.empirical_cov(0, 0), 0.0);
  EXPECT_EQ(r.bias_norm, 0.0);
  EXPECT_LT(r.loewner_slack, 0.0);

  const auto off = make_estimator(*f, "constant:5", th);
  EXPECT_FALSE(off.unbiased_claim);
  const EstimatorReport b = monte_carlo_report(*f, th, off, 10, 1000, 1);
  EXPECT_NEAR(b.bias_norm, 2.0, 1e-15);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  const auto f = make_gaussian1d();
  const ParamPoint th = pt({0.0, 1.0}, "mu-sigmasq");
  const auto est = make_estimator(*f, "mean-var", th);
  MonteCarloOptions one{1, true}, four{4, true};
  const auto a = monte_carlo_report(*f, th, est, 20, 3000, 77, one);
  const auto b = monte_carlo_report(*f, th, est, 20, 3000, 77, four);
  EXPECT_EQ(a.empirical_cov, b.empirical_cov);
  EXPECT_EQ(a.empirical_mean, b.empirical_mean);
  ASSERT_EQ(a.estimates.size(), 3000u);
  for (std::size_t i = 0; i < a.estimates.size(); ++i) ASSERT_EQ(a.estimates[i], b.estimates[i]);
  const auto c = monte_carlo_report(*f, th, est, 20, 3000, 78, one);
  EXPECT_NE(a.empirical_cov, c.empirical_cov);
}

TEST(MonteCarlo, ReplicateFailureListsIndices) {
  const auto f = make_poisson();
  const ParamPoint th = pt({3.0}, "lambda");
  EstimatorSpec bad = make_estimator(*f, "mean", th);
  bad.map = [](std::span<const double> xs) -> Vector {
    if (xs[0] > 5.0) throw std::runtime_error("too large");
    return make_vector({xs[0]});
  };
  try {
    monte_carlo_report(*f, th, bad, 4, 200, 2, {1, false});
    FAIL() << "expected ReplicateFailure";
  } catch (const ReplicateFailure& e) {
    ASSERT_FALSE(e.indices().empty());
    for (std::size_t i = 1; i < e.indices().size(); ++i)
      EXPECT_LT(e.indices()[i - 1], e.indices()[i]);
  }
}

TEST(MonteCarlo, RejectsBadRequests) {
  const auto f = make_poisson();
  const ParamPoint th = pt({3.0}, "lambda");
  const auto est = make_estimator(*f, "mean", th);
  EXPECT_THROW(monte_carlo_report(*f, th, est, 10, 1, 0), UsageError);
  EXPECT_THROW(monte_carlo_report(*f, reparameterize(*f, th, "natural"), est, 10, 10, 0),
               UsageError);
  EXPECT_THROW(make_estimator(*f, "median", th), UsageError);
  EXPECT_THROW(make_estimator(*f, "constant:1,2", th), UsageError);
}
