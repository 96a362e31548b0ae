#include "optoretro/filters.hpp"
#include "optoretro/noise_statistics.hpp"
#include "optoretro/simulator.hpp"

#include <benchmark/benchmark.h>

using namespace optoretro;

namespace {

ValidatedConfig pair(double tf) {
  SystemConfig cfg;
  cfg.cavity.kappa = kTwoPi * 5e6;
  cfg.cavity.nbar = 1e4;
  for (double f : {125e3, 135e3}) {
    OscillatorParams o;
    o.omega = kTwoPi * f;
    o.gamma = kTwoPi * 2e3;
    o.nu = 1.0;
    o.g = coupling_for_cooperativity(5.3, o, cfg.cavity);
    cfg.oscillators.push_back(o);
  }
  cfg.grid = SamplingGrid(5e6, tf);
  return validate(cfg);
}

}  // namespace

// Two-time noise matrix assembly; argument is the record length in samples.
void BM_NoiseMatrix(benchmark::State& state) {
  const auto cfg = pair(static_cast<double>(state.range(0)) / 5e6);
  for (auto _ : state) benchmark::DoNotOptimize(noise_matrix(cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NoiseMatrix)->RangeMultiplier(2)->Range(512, 4096)->Unit(benchmark::kMillisecond)->Complexity();

// Full GLS design: assembly plus Cholesky solve.
void BM_GlsFilters(benchmark::State& state) {
  const auto cfg = pair(static_cast<double>(state.range(0)) / 5e6);
  GlsOptions opt;
  opt.decimation = 1;
  for (auto _ : state) benchmark::DoNotOptimize(gls_filters(cfg, opt));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GlsFilters)->RangeMultiplier(2)->Range(512, 4096)->Unit(benchmark::kMillisecond)->Complexity();

// Bias covariances of a filter bank by the backward recursion.
void BM_RawNoise(benchmark::State& state) {
  const auto cfg = pair(static_cast<double>(state.range(0)) / 5e6);
  const auto bank = exp_filters(cfg, optimal_gammas(cfg));
  for (auto _ : state) {
    benchmark::DoNotOptimize(raw_noise(cfg.modes(), cfg.shot_noise_psd(), bank.m, cfg.grid()));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RawNoise)->RangeMultiplier(4)->Range(1024, 65536)->Unit(benchmark::kMillisecond)->Complexity();

// One simulated 1 ms shot of two oscillators.
void BM_SimulateShot(benchmark::State& state) {
  const auto cfg = pair(1e-3);
  const GaussianSampler sampler(thermal_state(std::vector<double>{1.0, 1.0}));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_shot(cfg, sampler, ++seed));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.grid().nt()));
}
BENCHMARK(BM_SimulateShot)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
