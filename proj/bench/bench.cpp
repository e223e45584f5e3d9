// Serial references against the parallel library paths. Use --benchmark_filter to pick
// a pair; OMP_NUM_THREADS controls the parallel side.

#include <benchmark/benchmark.h>

#include <random>

#include "tpdo/experiments.hpp"
#include "tpdo/function_spaces.hpp"
#include "tpdo/kernels.hpp"
#include "tpdo/quantization.hpp"
#include "tpdo/reference.hpp"

using namespace tpdo;

namespace {

GridFunction random_function(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<Complex> v(g.point_count());
  for (auto& z : v) z = {d(rng), d(rng)};
  return GridFunction(g, std::move(v));
}

std::shared_ptr<const PdoOperator> exotic(int n) { return make_pdo(dsl::exotic_family(0, 0.75, 1), GridSpec({n})); }

void BM_ApplyReference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto t = exotic(n);
  const auto f = random_function(t->grid(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(reference::apply_pdo(t->symbol(), f));
}

void BM_ApplyParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto t = exotic(n);
  const auto f = random_function(t->grid(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(t->apply_general(f));
}

void BM_ApplyMultiplierFFT(benchmark::State& state) {
  const auto t = make_pdo(dsl::bessel_family(-1), GridSpec({static_cast<int>(state.range(0))}));
  const auto f = random_function(t->grid(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(t->apply_multiplier(f));
}

void BM_MaximalReference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = random_function(GridSpec({n, n}), 3);
  for (auto _ : state) benchmark::DoNotOptimize(reference::maximal_function(f));
}

void BM_MaximalParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = random_function(GridSpec({n, n}), 3);
  for (auto _ : state) benchmark::DoNotOptimize(maximal_function(f));
}

void BM_BmoNorm(benchmark::State& state) {
  const auto f = random_function(GridSpec({static_cast<int>(state.range(0))}), 4);
  for (auto _ : state) benchmark::DoNotOptimize(bmo_norm(f));
}

void BM_KernelSynthesis(benchmark::State& state) {
  const auto t = exotic(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_kernel(*t, 1));
}

void BM_L2Norm(benchmark::State& state) {
  const auto t = exotic(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(l2_norm(*t));
}

}  // namespace

BENCHMARK(BM_ApplyReference)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyMultiplierFFT)->Arg(256)->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MaximalReference)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaximalParallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BmoNorm)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelSynthesis)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_L2Norm)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
