#include <random>

#include <benchmark/benchmark.h>

#include "wma/hungarian.hpp"

namespace {

void BM_SolveAssignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cost(0.0, 10.0);
  wma::CostMatrix c(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < n; ++k) c(r, k) = cost(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(wma::solve_assignment(c));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveAssignment)->RangeMultiplier(2)->Range(8, 256)->Complexity(benchmark::oNCubed);

// Rectangular input padded with a dummy cost, as the differ uses it.
void BM_SolveRectangular(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> cost(0.0, 10.0);
  wma::CostMatrix c(n, n + n / 2);
  for (std::size_t r = 0; r < c.rows(); ++r) {
    for (std::size_t k = 0; k < c.cols(); ++k) c(r, k) = cost(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(wma::solve_assignment(c, 5.0));
}
BENCHMARK(BM_SolveRectangular)->Arg(32)->Arg(128);

}  // namespace
