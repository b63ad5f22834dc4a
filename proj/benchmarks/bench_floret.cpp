#include <benchmark/benchmark.h>

#include <filesystem>

#include "floret/asymptotics.hpp"
#include "floret/estimation.hpp"
#include "floret/io.hpp"
#include "floret/simulate.hpp"

namespace {

const floret::Model& severity() {
  static const floret::Model m =
      floret::load_model(std::filesystem::path(FLORET_DATA_DIR) / "models" / "severity.json");
  return m;
}

floret::ParameterVector severity_theta() {
  return floret::ParameterVector({Eigen::Vector3d(0.5, 0.3, 0.2), Eigen::Vector2d(0.4, 0.6)});
}

void BM_FitMle(benchmark::State& state) {
  const floret::ObservedCounts y({46, 83, 176, 16, 37, 91, 6, 21, 43});
  for (auto _ : state) benchmark::DoNotOptimize(floret::fit_mle(severity().matrix, y));
}
BENCHMARK(BM_FitMle);

void BM_FitExact(benchmark::State& state) {
  const floret::ObservedCounts y({46, 83, 176, 16, 37, 91, 6, 21, 43});
  for (auto _ : state) benchmark::DoNotOptimize(floret::fit_exact(severity().matrix, y));
}
BENCHMARK(BM_FitExact);

void BM_AtaMatrix(benchmark::State& state) {
  const auto theta = severity_theta();
  for (auto _ : state) benchmark::DoNotOptimize(floret::ata_matrix(severity().matrix, theta));
}
BENCHMARK(BM_AtaMatrix);

void BM_CovarianceP(benchmark::State& state) {
  const auto theta = severity_theta();
  for (auto _ : state) benchmark::DoNotOptimize(floret::covariance_p(severity().matrix, theta));
}
BENCHMARK(BM_CovarianceP);

void BM_OverallEffect(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(floret::floret_has_overall_effect(severity().matrix, 1));
}
BENCHMARK(BM_OverallEffect);

void BM_SamplePath(benchmark::State& state) {
  const auto theta = severity_theta();
  floret::Engine engine(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(floret::sample_path(severity().tree, theta, state.range(0), engine));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePath)->Arg(1000)->Arg(100000);

void BM_SampleMultinomial(benchmark::State& state) {
  const auto theta = severity_theta();
  floret::Engine engine(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(floret::sample_multinomial(severity().matrix, theta, state.range(0), engine));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleMultinomial)->Arg(1000)->Arg(100000);

void BM_MonteCarlo(benchmark::State& state) {
  floret::SimulationConfig cfg;
  cfg.theta0 = severity_theta();
  cfg.n = 1000;
  cfg.reps = 200;
  cfg.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(floret::run_monte_carlo(cfg, severity()));
}
BENCHMARK(BM_MonteCarlo)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
