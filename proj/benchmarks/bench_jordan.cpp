#include "tdsyn/jordan.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace tdsyn;

void BM_RealJordanForm(benchmark::State& state) {
  const Index n = state.range(0);
  std::mt19937 rng(5);
  std::normal_distribution<double> dist;
  Mat a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = dist(rng);
  for (auto _ : state) {
    const RealJordanForm f = real_jordan_form(a);
    benchmark::DoNotOptimize(f.conditioning);
  }
}
BENCHMARK(BM_RealJordanForm)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

}  // namespace
