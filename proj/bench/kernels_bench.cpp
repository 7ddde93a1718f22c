// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <random>

#include "memmo/approximators.hpp"
#include "memmo/kernels.hpp"

namespace {

using memmo::Exec;
using memmo::Matrix;
using memmo::Vector;

Matrix Random(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Exec Policy(const benchmark::State& state) { return state.range(1) ? Exec::kParallel : Exec::kSerial; }

void SetLabel(benchmark::State& state) { state.SetLabel(state.range(1) ? "parallel" : "serial"); }

void BM_SquaredDistances(benchmark::State& state) {
  const Matrix a = Random(state.range(0), 8, 1), b = Random(state.range(0), 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(memmo::SquaredDistances(a, b, Policy(state)));
  SetLabel(state);
}

void BM_RbfGram(benchmark::State& state) {
  const Matrix a = Random(state.range(0), 8, 3);
  for (auto _ : state) benchmark::DoNotOptimize(memmo::RbfGram(a, a, 1.0, 1.0, Policy(state)));
  SetLabel(state);
}

void BM_QuadraticForms(benchmark::State& state) {
  const Matrix z = Random(state.range(0), 64, 4);
  const Vector c = Random(64, 1, 5);
  const Matrix lower = Random(64, 64, 6).triangularView<Eigen::Lower>();
  for (auto _ : state) benchmark::DoNotOptimize(memmo::QuadraticForms(z, c, lower, Policy(state)));
  SetLabel(state);
}

void BM_KnnNeighbors(benchmark::State& state) {
  const Matrix x = Random(state.range(0), 8, 7);
  const memmo::KnnModel model = memmo::KnnModel::Fit(x, Random(state.range(0), 120, 8), {.k = 5});
  const Vector q = Random(8, 1, 9);
  for (auto _ : state) benchmark::DoNotOptimize(model.Neighbors(q, Policy(state)));
  SetLabel(state);
}

void Sizes(benchmark::internal::Benchmark* b) {
  for (int n : {100, 500, 2000}) {
    for (int parallel : {0, 1}) b->Args({n, parallel});
  }
}

BENCHMARK(BM_SquaredDistances)->Apply(Sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RbfGram)->Apply(Sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_QuadraticForms)->Apply(Sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_KnnNeighbors)->Apply(Sizes)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
