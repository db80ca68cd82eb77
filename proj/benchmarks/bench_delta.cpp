#include <benchmark/benchmark.h>

#include "synthetic.hpp"
#include "wma/ax_tree.hpp"
#include "wma/diff.hpp"

namespace {

// Two pages sharing a prefix; the tail differs so some matches fail.
void BM_ComputeDelta(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const wma::AxTree before = wma::parse_axtree(wma::bench::synthetic_page(n, 1));
  const wma::AxTree after = wma::parse_axtree(wma::bench::synthetic_page(n + n / 10, 1));
  const wma::MatchWeights weights;
  for (auto _ : state) benchmark::DoNotOptimize(wma::compute_delta(before, after, weights));
}
BENCHMARK(BM_ComputeDelta)->Arg(20)->Arg(80)->Arg(200);

void BM_TaoState(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const wma::AxTree before = wma::parse_axtree(wma::bench::synthetic_page(n, 2));
  const wma::AxTree after = wma::parse_axtree(wma::bench::synthetic_page(n, 3));
  const wma::MatchWeights weights;
  for (auto _ : state) benchmark::DoNotOptimize(wma::tao_state(before, after, weights));
}
BENCHMARK(BM_TaoState)->Arg(40)->Arg(160);

}  // namespace
