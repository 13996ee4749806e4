#include "tdsyn/delay_oracle.hpp"

#include "tdsyn/fixtures.hpp"
#include "test_utils.hpp"

#include <gtest/gtest.h>

#include <random>

namespace tdsyn {
namespace {

using test::random_hurwitz;
using test::random_mat;

TEST(Simulate, ScalarExponentialDecay) {
  Mat a(1, 1), ad(1, 1);
  a << -1.0;
  ad << 0.0;
  Vec x0(1);
  x0 << 1.0;
  const DelayTrajectory traj = simulate(a, ad, 0.1, x0, 5.0, 1e-3);
  ASSERT_FALSE(traj.diverged);
  for (std::size_t i = 0; i < traj.times.size(); i += 500) {
    const double t = traj.times[i];
    if (t < 0.0) continue;
    EXPECT_NEAR(traj.states[i][0], std::exp(-t), 1e-6) << "t = " << t;
  }
  EXPECT_NEAR(traj.final_state()[0], std::exp(-5.0), 1e-6);
}

TEST(Simulate, RequiresResolvedDelay) {
  Mat a(1, 1), ad(1, 1);
  a << -1.0;
  ad << 0.0;
  Vec x0(1);
  x0 << 1.0;
  EXPECT_THROW(simulate(a, ad, 0.1, x0, 1.0, 0.05), Error);
}

TEST(Simulate, DivergenceFlag) {
  Mat a(1, 1), ad(1, 1);
  a << 3.0;
  ad << 0.0;
  Vec x0(1);
  x0 << 1.0;
  const DelayTrajectory traj = simulate(a, ad, 0.2, x0, 30.0, 1e-2);
  EXPECT_TRUE(traj.diverged);
}

// Below the certified bound the envelope decays at the oracle rate (the
// slowest mode of this loop sits at about -0.0036 for h = 4.9, so the decay
// over a 40h window is mild but strict and keeps shrinking).
TEST(Simulate, StableBelowCertifiedDelay) {
  const DelaySystem sys = fixtures::example1();
  const Mat a_d = sys.delayed_matrix(fixtures::example1_reference_gain(1));
  const double h = 4.9;
  const double alpha = spectral_abscissa(sys.a, a_d, h).abscissa;
  ASSERT_LT(alpha, 0.0);
  Vec x0(2);
  x0 << 1.0, -0.5;
  const DelayTrajectory traj = simulate(sys.a, a_d, h, x0, 80.0 * h, h / 40.0);
  ASSERT_FALSE(traj.diverged);
  const std::size_t mid = traj.states.size() / 2;
  const double ratio_half = traj.states[mid].norm() / x0.norm();
  const double ratio_full = traj.final_state().norm() / x0.norm();
  EXPECT_LT(ratio_half, 1.0);
  EXPECT_LT(ratio_full, ratio_half);
  // Envelope consistent with exp(alpha t) up to a modest constant.
  EXPECT_LT(ratio_full, 20.0 * std::exp(alpha * 80.0 * h));
}

TEST(Simulate, NonDecayingAboveSpectralBound) {
  const DelaySystem sys = fixtures::example1();
  const Mat a_d = sys.delayed_matrix(fixtures::example1_reference_gain(1));
  const double h = 5.2;
  Vec x0(2);
  x0 << 1.0, -0.5;
  const DelayTrajectory traj = simulate(sys.a, a_d, h, x0, 60.0 * h, h / 40.0);
  double late_peak = 0.0;
  for (std::size_t i = traj.states.size() / 2; i < traj.states.size(); ++i)
    late_peak = std::max(late_peak, traj.states[i].norm());
  EXPECT_GT(late_peak, 0.5 * x0.norm());
}

TEST(Abscissa, DelayFreeReduction) {
  std::mt19937 rng(3);
  const Mat a = random_mat(rng, 3, 3);
  const Mat ad = Mat::Zero(3, 3);
  for (double h : {0.1, 2.0, 50.0}) {
    const SpectralEstimate est = spectral_abscissa(a, ad, h);
    EXPECT_NEAR(est.abscissa, matrix_abscissa(a), 1e-10) << "h = " << h;
  }
}

TEST(Abscissa, ScalarPureDelayCrossing) {
  // xdot = -x(t-h): stable iff h < pi/2; the root crosses the axis there.
  Mat a(1, 1), ad(1, 1);
  a << 0.0;
  ad << -1.0;
  EXPECT_LT(spectral_abscissa(a, ad, M_PI / 2.0 - 0.05).abscissa, 0.0);
  EXPECT_GT(spectral_abscissa(a, ad, M_PI / 2.0 + 0.05).abscissa, 0.0);
  const SpectralDelayResult res = spectral_max_delay(a, ad, 1e-4);
  EXPECT_NEAR(res.h_max, M_PI / 2.0, 5e-4);
}

TEST(Abscissa, OrderRefinementStable) {
  const DelaySystem sys = fixtures::example1();
  const Mat a_d = sys.delayed_matrix(fixtures::example1_reference_gain(2));
  SpectralOptions coarse;
  coarse.order = 16;
  SpectralOptions fine;
  fine.order = 48;
  const double v1 = spectral_abscissa(sys.a, a_d, 3.0, coarse).abscissa;
  const double v2 = spectral_abscissa(sys.a, a_d, 3.0, fine).abscissa;
  EXPECT_NEAR(v1, v2, 1e-6);
}

TEST(Abscissa, SimulationAgreesWithSign) {
  std::mt19937 rng(11);
  int checked = 0;
  while (checked < 50) {
    const Index n = 1 + checked % 3;
    const Mat a = random_hurwitz(rng, n, 0.8);
    const Mat ad = 0.6 * random_mat(rng, n, n);
    const double h = 0.2 + 0.1 * (checked % 10);
    if (matrix_abscissa(a + ad) >= 0.0) {
      // keep only instances with a meaningful h -> 0 limit
      continue;
    }
    const double alpha = spectral_abscissa(a, ad, h).abscissa;
    if (std::abs(alpha) < 0.05) continue;  // skip near-marginal cases
    Vec x0 = Vec::Ones(n);
    const double t_end = std::min(400.0, 25.0 / std::abs(alpha));
    const DelayTrajectory traj = simulate(a, ad, h, x0, t_end, h / 20.0);
    const double ratio = traj.diverged
                             ? 1e12
                             : traj.final_state().norm() / std::max(1e-300, x0.norm());
    if (alpha < 0.0)
      EXPECT_LT(ratio, 1.0) << "alpha = " << alpha << " h = " << h;
    else
      EXPECT_GT(ratio, 1.0) << "alpha = " << alpha << " h = " << h;
    ++checked;
  }
}

// Published margins of two preset-synthesis gain rows for the bundled plant.
TEST(MaxDelay, PresetGainRowsReproduceReportedMargins) {
  const DelaySystem sys = fixtures::example1();
  Mat k_eps2(2, 2), k_eps1(2, 2);
  k_eps2 << 0.6693, 0.0, -0.2440, 0.2503;
  k_eps1 << 0.5802, 0.0, -0.1311, 0.2064;
  EXPECT_NEAR(spectral_max_delay(sys.a, sys.delayed_matrix(k_eps2), 1e-3).h_max, 1.98, 0.02);
  EXPECT_NEAR(spectral_max_delay(sys.a, sys.delayed_matrix(k_eps1), 1e-3).h_max, 2.23, 0.02);
}

TEST(MaxDelay, CappedWhenDelayFreeStable) {
  std::mt19937 rng(13);
  const Mat a = random_hurwitz(rng, 2);
  const Mat ad = Mat::Zero(2, 2);
  const SpectralDelayResult res = spectral_max_delay(a, ad, 1e-3, 10.0);
  EXPECT_TRUE(res.capped);
  EXPECT_EQ(res.h_max, 10.0);
}

TEST(MaxDelay, ThrowsWhenUnstableAtZero) {
  Mat a(1, 1), ad(1, 1);
  a << 0.5;
  ad << 0.1;
  try {
    spectral_max_delay(a, ad);
    FAIL() << "expected UnstableAtZero";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnstableAtZero);
  }
}

}  // namespace
}  // namespace tdsyn
