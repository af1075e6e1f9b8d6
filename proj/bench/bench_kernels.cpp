// Serial vs OpenMP timings for the shared numeric kernels on wine-sized inputs.

#include "winelab/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace winelab;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(gen);
  }
  return m;
}

constexpr std::size_t kFeatures = 10;

void BM_GramSerial(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), kFeatures, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::gram_matrix(x, Kernel::rbf(0.1)));
}

void BM_GramOmp(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), kFeatures, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::gram_matrix(x, Kernel::rbf(0.1)));
}

void BM_DistanceSerial(benchmark::State& state) {
  const Matrix q = random_matrix(static_cast<std::size_t>(state.range(0)) / 4, kFeatures, 2);
  const Matrix r = random_matrix(static_cast<std::size_t>(state.range(0)), kFeatures, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::distance_matrix(q, r));
}

void BM_DistanceOmp(benchmark::State& state) {
  const Matrix q = random_matrix(static_cast<std::size_t>(state.range(0)) / 4, kFeatures, 2);
  const Matrix r = random_matrix(static_cast<std::size_t>(state.range(0)), kFeatures, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::distance_matrix(q, r));
}

void BM_CorrelationSerial(benchmark::State& state) {
  const Matrix d = random_matrix(static_cast<std::size_t>(state.range(0)), 12, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::correlation_matrix(d));
}

void BM_CorrelationOmp(benchmark::State& state) {
  const Matrix d = random_matrix(static_cast<std::size_t>(state.range(0)), 12, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::correlation_matrix(d));
}

}  // namespace

BENCHMARK(BM_GramSerial)->Arg(400)->Arg(1600);
BENCHMARK(BM_GramOmp)->Arg(400)->Arg(1600);
BENCHMARK(BM_DistanceSerial)->Arg(400)->Arg(1600);
BENCHMARK(BM_DistanceOmp)->Arg(400)->Arg(1600);
BENCHMARK(BM_CorrelationSerial)->Arg(1600)->Arg(16000);
BENCHMARK(BM_CorrelationOmp)->Arg(1600)->Arg(16000);

BENCHMARK_MAIN();
