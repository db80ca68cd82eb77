#include <string>

#include <benchmark/benchmark.h>

#include "wma/similarity.hpp"

namespace {

void BM_SimilarityRatio(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  std::string a, b;
  for (std::size_t i = 0; i < len; ++i) {
    a += static_cast<char>('a' + (i * 7) % 26);
    b += static_cast<char>('a' + (i * 11) % 26);
  }
  for (auto _ : state) benchmark::DoNotOptimize(wma::similarity_ratio(a, b));
}
BENCHMARK(BM_SimilarityRatio)->Arg(16)->Arg(64)->Arg(256);

}  // namespace
