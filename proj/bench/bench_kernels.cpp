#include <benchmark/benchmark.h>

#include "doer/csu.hpp"
#include "doer/kernels.hpp"
#include "doer/rng.hpp"

using namespace doer;

namespace {

Tensor filled(std::vector<std::size_t> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = filled({n, n}, 1), b = filled({n, n}, 2);
  Tensor c = Tensor::matrix(n, n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::gemm(kernels::view(a), kernels::Trans::kNo, kernels::view(b), kernels::Trans::kNo, kernels::view(c));
    } else {
      kernels::serial::gemm(kernels::view(a), kernels::Trans::kNo, kernels::view(b), kernels::Trans::kNo,
                            kernels::view(c));
    }
    benchmark::DoNotOptimize(c.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

// sentence length n, hidden width 2*300, 5 slices
void BM_AttentionScores(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t w = 600, k = 5;
  const Tensor hs = filled({n, w}, 3), ho = filled({n, w}, 4), g = filled({k, w, w}, 5), v = filled({k}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(attention_scores(hs, ho, g, v));
}

}  // namespace

BENCHMARK(BM_Gemm<false>)->Name("gemm/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_Gemm<true>)->Name("gemm/openmp")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_AttentionScores)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
