#include "tdsyn/bessel_legendre.hpp"
#include "tdsyn/fixtures.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace tdsyn;

void BM_AnalysisSolve(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const DelaySystem sys = fixtures::example1();
  const Mat a_d = sys.delayed_matrix(fixtures::example1_reference_gain(1));
  const SdpProblem prob = analysis_problem_projected(sys.a, a_d, order, 3.0);
  for (auto _ : state) {
    const SolverResult res = solve(prob);
    benchmark::DoNotOptimize(res.margin);
  }
}
BENCHMARK(BM_AnalysisSolve)->Arg(1)->Arg(2)->Arg(3);

void BM_MaxDelayBisection(benchmark::State& state) {
  const DelaySystem sys = fixtures::example1();
  const Mat a_d = sys.delayed_matrix(fixtures::example1_reference_gain(1));
  for (auto _ : state) {
    const MaxDelayResult res = max_delay_analysis(sys.a, a_d, 1);
    benchmark::DoNotOptimize(res.h_max);
  }
}
BENCHMARK(BM_MaxDelayBisection)->Unit(benchmark::kMillisecond);

}  // namespace
