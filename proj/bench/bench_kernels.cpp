// Throughput comparison of the serial reference kernels against the OpenMP
// variants. Run: build/bench/bench_kernels
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tilt/kernels.hpp"
#include "tilt/sensors.hpp"

namespace {

using namespace tilt;

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

const FirFilter& fir51() {
  static const FirFilter f = design_fir(50, 20.0, 1000.0);
  return f;
}

void bm_fir_ref(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_signal(n, 1);
  std::vector<double> y(n);
  for (auto _ : state) {
    kernels::ref::fir_causal(fir51().taps, x, y);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}

void bm_fir_omp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_signal(n, 1);
  std::vector<double> y(n);
  for (auto _ : state) {
    kernels::omp::fir_causal(fir51().taps, x, y);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}

void bm_diff2_ref(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_signal(n, 2);
  std::vector<double> y(n);
  for (auto _ : state) {
    kernels::ref::diff2(x, 1e-3, kernels::DiffScheme::central, y);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}

void bm_diff2_omp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_signal(n, 2);
  std::vector<double> y(n);
  for (auto _ : state) {
    kernels::omp::diff2(x, 1e-3, kernels::DiffScheme::central, y);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}

kernels::EstimateMapArgs make_args(const std::vector<double>& phi,
                                   const std::vector<double>& pd,
                                   const std::vector<double>& pdd,
                                   const std::vector<double>& gd,
                                   const std::vector<double>& gk) {
  kernels::EstimateMapArgs a;
  a.phi = phi;
  a.phi_dot = pd;
  a.phi_ddot = pdd;
  a.gd = gd;
  a.gk = gk;
  a.a = 2.0387e-3;
  a.b = 1.0194e-2;
  a.c = -1.0194e-2;
  a.n = 0.02;
  return a;
}

void bm_estimate_ref(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto phi = random_signal(n, 3), pd = random_signal(n, 4),
             pdd = random_signal(n, 5), gd = random_signal(n, 6),
             gk = random_signal(n, 7);
  std::vector<double> y(n);
  std::vector<std::uint8_t> fl(n);
  const auto args = make_args(phi, pd, pdd, gd, gk);
  for (auto _ : state) {
    kernels::ref::estimate_map(args, y, fl);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}

void bm_estimate_omp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto phi = random_signal(n, 3), pd = random_signal(n, 4),
             pdd = random_signal(n, 5), gd = random_signal(n, 6),
             gk = random_signal(n, 7);
  std::vector<double> y(n);
  std::vector<std::uint8_t> fl(n);
  const auto args = make_args(phi, pd, pdd, gd, gk);
  for (auto _ : state) {
    kernels::omp::estimate_map(args, y, fl);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}

}  // namespace

BENCHMARK(bm_fir_ref)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(bm_fir_omp)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(bm_diff2_ref)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_diff2_omp)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_estimate_ref)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_estimate_omp)->Arg(1 << 16)->Arg(1 << 20);

BENCHMARK_MAIN();
