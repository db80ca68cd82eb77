#include <benchmark/benchmark.h>

#include "synthetic.hpp"
#include "wma/action.hpp"
#include "wma/ax_tree.hpp"

namespace {

void BM_ParseAxTree(benchmark::State& state) {
  const std::string text = wma::bench::synthetic_page(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(wma::parse_axtree(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseAxTree)->Arg(50)->Arg(500);

void BM_ParseAction(benchmark::State& state) {
  const std::string reply =
      "The search box is element 4, so I will type the product name there.\n"
      "In summary, the next action I will perform is ```type [4] [blue running shoes] [1]```";
  for (auto _ : state) benchmark::DoNotOptimize(wma::parse_action(reply));
}
BENCHMARK(BM_ParseAction);

}  // namespace
