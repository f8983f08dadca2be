// Throughput of the hot paths: rate-function inversion, kernel spectra,
// conditional MGF evaluation and the exact OU stepper.
//
// Build in Release and run with --benchmark_min_time=1 for stable numbers.

#include <benchmark/benchmark.h>

#include "eprld/chaos.hpp"
#include "eprld/cramer.hpp"
#include "eprld/montecarlo.hpp"
#include "eprld/spectral.hpp"

#include <numbers>

namespace {

eprld::SystemSpec magnetic() { return eprld::magnetic_example(std::numbers::pi / 4); }

void BM_RateFunction(benchmark::State& state) {
  const eprld::Spectrum sp = eprld::spectral_decompose(magnetic(), false);
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eprld::rate(x, sp));
    x = x > 3.0 ? -3.0 : x + 0.01;
  }
}
BENCHMARK(BM_RateFunction);

void BM_KernelSpectrum(benchmark::State& state) {
  const eprld::Spectrum sp = eprld::spectral_decompose(magnetic(), false);
  const int j_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(eprld::kernel_spectrum(sp, 1.0, j_max));
  state.SetComplexityN(j_max);
}
BENCHMARK(BM_KernelSpectrum)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_NystromSpectrum(benchmark::State& state) {
  const eprld::SystemSpec s = magnetic();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(eprld::nystrom_spectrum(s, 0.0, 1.0, n));
}
BENCHMARK(BM_NystromSpectrum)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ConditionalLogMgf(benchmark::State& state) {
  const eprld::SystemSpec s = magnetic();
  const eprld::MgfQuery q{eprld::Vector::Unit(2, 0), 0.5, 0.1, 1.0, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(eprld::conditional_log_mgf(q, s));
}
BENCHMARK(BM_ConditionalLogMgf)->Arg(50)->Arg(200)->Arg(800);

void BM_ExactStep(benchmark::State& state) {
  const eprld::SystemSpec s = magnetic();
  eprld::ExactStepper stepper(s, eprld::TiltedSystem::make(s, 0.0), 1e-3);
  eprld::Engine rng(7);
  eprld::Vector x = eprld::Vector::Unit(2, 0);
  eprld::Vector y(2);
  for (auto _ : state) {
    stepper.step(x, y, rng);
    x.swap(y);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_ExactStep);

void BM_SimulateEpr(benchmark::State& state) {
  const eprld::SystemSpec s = magnetic();
  eprld::SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 1e-3;
  cfg.n_traj = static_cast<std::size_t>(state.range(0));
  cfg.seed = 1;
  cfg.jobs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(eprld::simulate_epr(s, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateEpr)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
