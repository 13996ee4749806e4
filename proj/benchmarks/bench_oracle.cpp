#include "tdsyn/delay_oracle.hpp"
#include "tdsyn/fixtures.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace tdsyn;

void BM_SpectralAbscissa(benchmark::State& state) {
  const DelaySystem sys = fixtures::example1();
  const Mat a_d = sys.delayed_matrix(fixtures::example1_reference_gain(1));
  SpectralOptions opts;
  opts.order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const SpectralEstimate est = spectral_abscissa(sys.a, a_d, 4.0, opts);
    benchmark::DoNotOptimize(est.abscissa);
  }
}
BENCHMARK(BM_SpectralAbscissa)->Arg(20)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const DelaySystem sys = fixtures::example1();
  const Mat a_d = sys.delayed_matrix(fixtures::example1_reference_gain(1));
  Vec x0(2);
  x0 << 1.0, -0.5;
  for (auto _ : state) {
    const DelayTrajectory traj = simulate(sys.a, a_d, 2.0, x0, 50.0, 0.05);
    benchmark::DoNotOptimize(traj.states.back());
  }
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

}  // namespace
