// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "ergoinv/density.hpp"
#include "ergoinv/models.hpp"
#include "ergoinv/simulate.hpp"
#include "ergoinv/spde.hpp"

using namespace ergoinv;

namespace {

SimConfig sim_config() {
  SimConfig cfg;
  cfg.n_steps = 50000;
  cfg.n_chains = 8;
  cfg.thinning = 10;
  return cfg;
}

const EmpiricalMeasure& kde_samples() {
  static const EmpiricalMeasure em = sample_invariant(preset_pair("ou"), sim_config());
  return em;
}

SpdeConfig spde_config() {
  SpdeConfig cfg;
  cfg.n_modes = 16;
  cfg.n_steps = 10000;
  cfg.n_chains = 4;
  cfg.thinning = 10;
  cfg.potential = SpdePotential::allen_cahn();
  return cfg;
}

void BM_SampleInvariantSerial(benchmark::State& state) {
  const auto pair = preset_pair("double_well");
  for (auto _ : state) benchmark::DoNotOptimize(reference::sample_invariant(pair, sim_config()));
}

void BM_SampleInvariantParallel(benchmark::State& state) {
  const auto pair = preset_pair("double_well");
  for (auto _ : state) benchmark::DoNotOptimize(sample_invariant(pair, sim_config(), Exec::parallel));
}

void BM_KdeReference(benchmark::State& state) {
  const auto grid = GridSpec::uniform(1, -5.0, 5.0, 401);
  for (auto _ : state) benchmark::DoNotOptimize(reference::kde_density(kde_samples(), grid));
}

void BM_KdeParallel(benchmark::State& state) {
  const auto grid = GridSpec::uniform(1, -5.0, 5.0, 401);
  for (auto _ : state) benchmark::DoNotOptimize(kde_density(kde_samples(), grid, Exec::parallel));
}

void BM_SpdeReference(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(reference::simulate_spde(spde_config()));
}

void BM_SpdeParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(simulate_spde(spde_config(), Exec::parallel));
}

void BM_FpResidual(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Exec::serial : Exec::parallel;
  const auto pair = preset_pair("gaussian_2d");
  const auto p = gibbs_density(pair.potential_field(), 2.0, -6.0, 6.0, 201, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fp_residual(p, pair, 2, exec));
}

}  // namespace

BENCHMARK(BM_SampleInvariantSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleInvariantParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdeReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdeParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpdeReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpdeParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FpResidual)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
