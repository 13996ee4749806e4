#include "tdsyn/slack.hpp"

#include "tdsyn/fixtures.hpp"
#include "test_utils.hpp"

#include <gtest/gtest.h>

#include <random>

namespace tdsyn {
namespace {

using test::random_mat;

Mat worked_example_a1() {
  Mat a(4, 4);
  a << 5, 3, 3, 2,
       0, 2, -2, -2,
       -1, -1, 3, 0,
       1, 1, 1, 4;
  return a;
}

Mat worked_example_a2() {
  return block_diag({Mat::Identity(2, 2), 3.0 * Mat::Identity(2, 2)});
}

// Independent 1-D minimizer of ||M - F||_F^2 in one epsilon (the objective is
// separable per slot and convex): coarse bracket scan followed by iterated
// parabolic interpolation on function values only.
double numeric_min(const std::function<double(double)>& f, double lo, double hi) {
  double best = lo, fbest = f(lo);
  const int grid = 400;
  for (int i = 1; i <= grid; ++i) {
    const double x = lo + (hi - lo) * i / grid;
    const double fx = f(x);
    if (fx < fbest) {
      fbest = fx;
      best = x;
    }
  }
  // Fixed-stencil parabolic steps: exact for a quadratic objective, so the
  // final precision is set by roundoff rather than the stencil width.
  double e = best;
  const double d = 0.5;
  for (int it = 0; it < 3; ++it) {
    const double fm = f(e - d), f0 = f(e), fp = f(e + d);
    const double denom = fp - 2.0 * f0 + fm;
    if (denom <= 0.0) break;
    e -= 0.5 * d * (fp - fm) / denom;
  }
  return e;
}

TEST(EpsilonUnstructured, IdentityBlocks) {
  const std::vector<Mat> blocks(3, Mat::Identity(4, 4));
  const auto eps = epsilon_unstructured(blocks, Mat::Identity(4, 4));
  for (double e : eps) EXPECT_NEAR(e, 1.0, 1e-15);
}

TEST(EpsilonUnstructured, WorkedExampleTrace) {
  const auto eps = epsilon_unstructured({worked_example_a1()}, Mat::Identity(4, 4));
  EXPECT_NEAR(eps[0], 3.5, 1e-15);  // tr = 5+2+3+4 = 14, /4
}

TEST(EpsilonUnstructured, TracelessBlockOptimumIsZero) {
  Mat a(2, 2);
  a << 0.2, 0.0, 0.2, -0.2;  // tr(A) = 0 but A != 0
  const auto eps = epsilon_unstructured({a}, Mat::Identity(2, 2));
  EXPECT_EQ(eps[0], 0.0);
  EXPECT_GT(a.norm(), 0.1);
}

TEST(EpsilonStructured, WorkedExampleValues) {
  const Mat a1 = worked_example_a1();
  const Mat a2 = worked_example_a2();
  const RealJordanForm jordan = real_jordan_form(a1);
  ASSERT_EQ(jordan.group_count(), 2u);
  ASSERT_EQ(jordan.groups[0].size, 3);

  const Mat a1t = jordan.transform_inv * a1 * jordan.transform;
  const Mat a2t = jordan.transform_inv * a2 * jordan.transform;
  const EpsilonTable t = epsilon_structured(jordan, {a1t, a2t});

  EXPECT_NEAR(t.values(0, 0), 4.0, 1e-9);
  EXPECT_NEAR(t.values(0, 1), 2.0, 1e-9);
  EXPECT_NEAR(t.values(1, 0), 7.0 / 3.0, 1e-9);
  EXPECT_NEAR(t.values(1, 1), 1.0, 1e-9);

  const Mat f = build_f_w(t, jordan);
  Mat expected = Mat::Zero(4, 8);
  expected.leftCols(4) = block_diag({4.0 * Mat::Identity(3, 3), 2.0 * Mat::Identity(1, 1)});
  expected.rightCols(4) =
      block_diag({(7.0 / 3.0) * Mat::Identity(3, 3), Mat::Identity(1, 1)});
  EXPECT_MAT_NEAR(f, expected, 1e-9);
}

TEST(EpsilonStructured, SingleFullBlockReducesToUnstructured) {
  std::mt19937 rng(5);
  const Mat a = random_mat(rng, 3, 3);
  const RealJordanForm id = RealJordanForm::identity(a);
  const EpsilonTable t = epsilon_structured(id, {a});
  const auto eps = epsilon_unstructured({a}, Mat::Identity(3, 3));
  EXPECT_NEAR(t.values(0, 0), eps[0], 1e-15);
}

TEST(EpsilonStructured, ZeroBlocksGiveZero) {
  const RealJordanForm jordan = real_jordan_form(worked_example_a1());
  const EpsilonTable t = epsilon_structured(jordan, {Mat::Zero(4, 4)});
  EXPECT_EQ(t.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildFW, PatternCommutesWithEpsilonBlocks) {
  std::mt19937 rng(9);
  const RealJordanForm jordan = real_jordan_form(worked_example_a1());
  EpsilonTable t;
  t.values = random_mat(rng, 2, 2);
  const Mat f = build_f_w(t, jordan);
  for (Index slot = 0; slot < 2; ++slot) {
    const Mat e_i = f.middleCols(slot * 4, 4);
    // W with the same block pattern, random fills.
    Mat w = Mat::Zero(4, 4);
    for (std::size_t j = 0; j < jordan.group_count(); ++j) {
      const auto& g = jordan.groups[j];
      w.block(g.start, g.start, g.size, g.size) = random_mat(rng, g.size, g.size);
    }
    EXPECT_MAT_NEAR(Mat(e_i * w), Mat(w * e_i), 1e-12);
  }
}

TEST(SynthesisEpsilons, WorkedStartingGain) {
  const DelaySystem sys = fixtures::example1();
  const Mat k0 = fixtures::example1_k0();

  // The chosen starting gain closes the delay-free loop at diag(-1, -2).
  Mat bk_expected(2, 2);
  bk_expected << -1.2, 0.0, -0.2, -1.8;
  EXPECT_MAT_NEAR(Mat(sys.b * k0), bk_expected, 1e-15);
  Mat acl_expected = Mat::Zero(2, 2);
  acl_expected(0, 0) = -1.0;
  acl_expected(1, 1) = -2.0;
  EXPECT_MAT_NEAR(Mat(sys.a + sys.b * k0), acl_expected, 1e-15);

  const RealJordanForm jordan = real_jordan_form(sys.a);
  ASSERT_EQ(jordan.group_count(), 2u);
  const EpsilonTable t = synthesis_epsilons(jordan, sys.a, sys.b, k0, sys.c, 4);
  ASSERT_EQ(t.slot_count(), 4);
  ASSERT_EQ(t.group_count(), 2);

  // Direct evaluation of the printed block-trace formulas.
  const Mat at = jordan.transform_inv * sys.a * jordan.transform;
  const Mat bkt = jordan.transform_inv * sys.b * k0 * jordan.transform;
  for (std::size_t j = 0; j < 2; ++j) {
    const Mat sel = jordan.group_selector(j);
    const double rj = static_cast<double>(jordan.groups[j].size);
    EXPECT_NEAR(t.values(0, static_cast<Index>(j)), 1.0, 1e-12);
    EXPECT_NEAR(t.values(1, static_cast<Index>(j)), -(sel * at * sel.transpose()).trace() / rj, 1e-12);
    EXPECT_NEAR(t.values(2, static_cast<Index>(j)), -(sel * bkt * sel.transpose()).trace() / rj, 1e-12);
    EXPECT_EQ(t.values(3, static_cast<Index>(j)), 0.0);
  }
}

TEST(SynthesisEpsilons, ZeroGainZeroesThirdSlot) {
  const DelaySystem sys = fixtures::example1();
  const RealJordanForm jordan = real_jordan_form(sys.a);
  const EpsilonTable t = synthesis_epsilons(jordan, sys.a, sys.b, Mat::Zero(2, 2), sys.c, 4);
  EXPECT_EQ(t.values.row(2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SynthesisEpsilons, VariantWithZeroA1ReducesToBase) {
  const DelaySystem sys = fixtures::example1();
  const RealJordanForm jordan = real_jordan_form(sys.a);
  const Mat k0 = fixtures::example1_k0();
  const EpsilonTable base = synthesis_epsilons(jordan, sys.a, sys.b, k0, sys.c, 5);
  const EpsilonTable variant =
      synthesis_epsilons(jordan, sys.a, sys.b, k0, sys.c, 5, Mat::Zero(2, 2));
  EXPECT_MAT_NEAR(variant.values, base.values, 0.0);
}

// First-order optimality of the closed form: any single-coordinate
// perturbation strictly increases the Frobenius distance.
TEST(Optimality, PerturbationIncreasesDistance) {
  std::mt19937 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const DelaySystem sys = fixtures::example1();
    const Mat k = random_mat(rng, 2, 2);
    const RealJordanForm jordan = real_jordan_form(sys.a);
    const EpsilonTable opt = synthesis_epsilons(jordan, sys.a, sys.b, k, sys.c, 4);
    const double d0 = slack_distance(jordan, sys.a, sys.b, k, sys.c, 4, build_f_w(opt, jordan));
    for (Index i = 0; i < opt.slot_count(); ++i)
      for (Index j = 0; j < opt.group_count(); ++j)
        for (double step : {1e-3, -1e-3}) {
          EpsilonTable pert = opt;
          pert.values(i, j) += step;
          const double d =
              slack_distance(jordan, sys.a, sys.b, k, sys.c, 4, build_f_w(pert, jordan));
          EXPECT_GT(d * d, d0 * d0) << "slot " << i << " group " << j;
        }
  }
}

// The closed form agrees with an independent numerical minimizer.
TEST(Optimality, MatchesGoldenSectionMinimizer) {
  std::mt19937 rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 2;
    const Index cal_n = 3;
    std::vector<Mat> blocks;
    for (Index s = 0; s < cal_n; ++s) blocks.push_back(random_mat(rng, n, n));
    const auto eps = epsilon_unstructured(blocks, Mat::Identity(n, n));
    for (Index s = 0; s < cal_n; ++s) {
      auto objective = [&](double e) {
        double total = 0.0;
        for (Index t2 = 0; t2 < cal_n; ++t2) {
          const double et = t2 == s ? e : eps[static_cast<std::size_t>(t2)];
          total += (blocks[static_cast<std::size_t>(t2)] - et * Mat::Identity(n, n)).squaredNorm();
        }
        return total;
      };
      const double numeric = numeric_min(objective, -50.0, 50.0);
      EXPECT_NEAR(eps[static_cast<std::size_t>(s)], numeric, 1e-9);
    }
  }
}

}  // namespace
}  // namespace tdsyn
