// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "plclab/capacity.hpp"
#include "plclab/noise_gen.hpp"
#include "plclab/numerics.hpp"

using namespace plclab;

namespace {

ComplexMatrix random_hpd(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  auto r = a * a.adjoint();
  for (std::size_t i = 0; i < n; ++i) r(i, i) += 0.1;
  return r;
}

void BM_Dft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<cplx> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = cplx(double(i % 7), -double(i % 3));
  for (auto _ : state) benchmark::DoNotOptimize(dft(x));
}
BENCHMARK(BM_Dft)->Arg(64)->Arg(256)->Arg(320)->Arg(1024);

void BM_Cholesky(benchmark::State& state) {
  const auto r = random_hpd(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(cholesky(r));
}
BENCHMARK(BM_Cholesky)->Arg(64)->Arg(128)->Arg(256);

void BM_EigHermitian(benchmark::State& state) {
  const auto r = random_hpd(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(eig_hermitian(r));
}
BENCHMARK(BM_EigHermitian)->Arg(16)->Arg(64)->Arg(128);

void BM_FreshTrace(benchmark::State& state) {
  const auto bank = synth_filter_bank(3, 19, static_cast<std::size_t>(state.range(0)), 2, 0.8, 0.3, 400);
  for (auto _ : state) benchmark::DoNotOptimize(generate_fresh_trace(bank, 5, 20, 400, 400e3));
}
BENCHMARK(BM_FreshTrace)->Arg(9)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_Waterfill(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::exponential_distribution<double> e;
  std::vector<double> eigs(static_cast<std::size_t>(state.range(0)));
  for (auto& v : eigs) v = e(rng);
  for (auto _ : state) benchmark::DoNotOptimize(waterfill(eigs, double(eigs.size())));
}
BENCHMARK(BM_Waterfill)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
