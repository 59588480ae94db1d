#include <benchmark/benchmark.h>

#include "lagcast/lagfeatures.hpp"
#include "lagcast/lasso.hpp"
#include "lagcast/pca.hpp"
#include "lagcast/regress.hpp"
#include "lagcast/synthdata.hpp"

using namespace lagcast;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  synth::Xorshift64Star rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

Matrix random_covariance(std::size_t p) {
  const Matrix x = random_matrix(2 * p, p, 11);
  return pca::covariance_matrix(x);
}

DesignMatrix random_design(std::size_t rows, std::size_t cols, std::vector<double>& y) {
  DesignMatrix d;
  d.values = random_matrix(rows, cols, 5);
  for (std::size_t j = 0; j < cols; ++j) d.labels.push_back("x" + std::to_string(j));
  synth::Xorshift64Star rng(9);
  y.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    y[i] = rng.normal();
    for (std::size_t j = 0; j < cols; j += 7) y[i] += 0.5 * d.values(i, j);
  }
  return d;
}

void BM_JacobiEigen(benchmark::State& state) {
  const Matrix s = random_covariance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pca::symmetric_eigen(s));
}
BENCHMARK(BM_JacobiEigen)->Arg(50)->Arg(105)->Arg(405)->Unit(benchmark::kMillisecond);

void BM_LassoFixedLambda(benchmark::State& state) {
  std::vector<double> y;
  const DesignMatrix x = random_design(1000, static_cast<std::size_t>(state.range(0)), y);
  lasso::LassoConfig cfg;
  cfg.lambda = 0.1 * lasso::lambda_max(x, y, false);
  for (auto _ : state) benchmark::DoNotOptimize(lasso::fit_lasso(x, y, cfg));
}
BENCHMARK(BM_LassoFixedLambda)->Arg(10)->Arg(105)->Unit(benchmark::kMillisecond);

void BM_LassoSelectLambda(benchmark::State& state) {
  std::vector<double> y;
  const DesignMatrix x = random_design(1000, 25, y);
  for (auto _ : state) benchmark::DoNotOptimize(lasso::select_lambda(x, y, {}));
}
BENCHMARK(BM_LassoSelectLambda)->Unit(benchmark::kMillisecond);

void BM_OlsQr(benchmark::State& state) {
  std::vector<double> y;
  const DesignMatrix x = random_design(2000, static_cast<std::size_t>(state.range(0)), y);
  for (auto _ : state) benchmark::DoNotOptimize(regress::fit_ols(x, y));
}
BENCHMARK(BM_OlsQr)->Arg(5)->Arg(105)->Unit(benchmark::kMillisecond);

void BM_LagMatrix(benchmark::State& state) {
  synth::GeneratorSpec spec;
  spec.kind = synth::Kind::ArProcess;
  spec.ar_coefficients = {0.9};
  spec.length = 2000;
  const auto frame = std::get<SeriesFrame>(synth::generate(spec));
  lags::LagSpec lag;
  lag.channels = {Channel::Open, Channel::High, Channel::Low, Channel::Close};
  lag.history_points = 100;
  lag.include_current_covariates = true;
  lag.covariates = lags::deep_history_covariates();
  for (auto _ : state) benchmark::DoNotOptimize(lags::build_lag_matrix(frame, lag));
}
BENCHMARK(BM_LagMatrix)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
