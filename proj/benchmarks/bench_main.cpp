#include <benchmark/benchmark.h>

#include "raogeo/divergences.hpp"
#include "raogeo/estimation.hpp"
#include "raogeo/expfam.hpp"
#include "raogeo/fisher.hpp"
#include "raogeo/geodesics.hpp"

using namespace raogeo;

namespace {

ParamPoint pt(std::initializer_list<double> v, const std::string& chart) {
  return ParamPoint{make_vector(v), chart};
}

}  // namespace

// Arg 0 selects the method: score-outer, neg-hessian, sqrt-form.
static void BM_FisherGaussian(benchmark::State& state) {
  const FisherMethod methods[] = {FisherMethod::ScoreOuter, FisherMethod::NegHessian,
                                  FisherMethod::SqrtForm};
  const FisherMethod m = methods[state.range(0)];
  const auto f = make_gaussian1d();
  const ParamPoint th = pt({0.3, 1.4}, "mu-sigma");
  for (auto _ : state) benchmark::DoNotOptimize(fisher_information(*f, th, m));
  state.SetLabel(to_string(m));
}
BENCHMARK(BM_FisherGaussian)->DenseRange(0, 2);

static void BM_FisherPoisson(benchmark::State& state) {
  const auto f = make_poisson();
  const ParamPoint th = pt({static_cast<double>(state.range(0))}, "lambda");
  for (auto _ : state)
    benchmark::DoNotOptimize(fisher_information(*f, th, FisherMethod::ScoreOuter));
}
BENCHMARK(BM_FisherPoisson)->Arg(4)->Arg(400);

static void BM_KlQuadrature(benchmark::State& state) {
  const auto f = make_gaussian1d();
  const ParamPoint p = pt({0.0, 1.0}, "mu-sigma"), q = pt({1.0, 2.0}, "mu-sigma");
  for (auto _ : state) benchmark::DoNotOptimize(kl(*f, p, q));
}
BENCHMARK(BM_KlQuadrature);

static void BM_GeodesicConnect(benchmark::State& state) {
  const auto f = make_gaussian1d();
  const ParamPoint a = pt({-1.0, 0.5}, "mu-sigma"), b = pt({2.0, 3.0}, "mu-sigma");
  ConnectOptions o;
  o.steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_connect(*f, a, b, o));
}
BENCHMARK(BM_GeodesicConnect)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_ToNatural(benchmark::State& state) {
  const auto spec = make_gaussian_expfam();
  const Vector eta = make_vector({0.7, 2.1});
  for (auto _ : state) benchmark::DoNotOptimize(to_natural(*spec, eta));
}
BENCHMARK(BM_ToNatural);

static void BM_MonteCarloReport(benchmark::State& state) {
  const auto f = make_poisson();
  const ParamPoint th = pt({3.0}, "lambda");
  const auto est = make_estimator(*f, "mean", th);
  MonteCarloOptions o;
  o.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(monte_carlo_report(*f, th, est, 100, 10000, 1, o));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_MonteCarloReport)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
