#include "tdsyn/matrix.hpp"

#include "test_utils.hpp"

#include <gtest/gtest.h>

namespace tdsyn {
namespace {

using test::random_mat;

TEST(Selector, LeadingRange) {
  const Mat s = selector(0, 3, 4);
  Mat expected = Mat::Zero(3, 4);
  expected.leftCols(3).setIdentity();
  EXPECT_MAT_NEAR(s, expected, 0.0);
}

TEST(Selector, FullRangeIsIdentity) {
  EXPECT_MAT_NEAR(selector(0, 5, 5), Mat::Identity(5, 5), 0.0);
}

TEST(Selector, SingleTrailingRow) {
  Mat expected(1, 4);
  expected << 0, 0, 0, 1;
  EXPECT_MAT_NEAR(selector(3, 1, 4), expected, 0.0);
}

TEST(Selector, OutOfRangeThrows) {
  EXPECT_THROW(selector(2, 3, 4), Error);
}

TEST(BlockAssemble, Diagonal) {
  Mat a(1, 1), b(1, 1);
  a << 2.0;
  b << 3.0;
  Mat expected(2, 2);
  expected << 2, 0, 0, 3;
  EXPECT_MAT_NEAR(block_assemble({{a, Mat()}, {Mat(), b}}), expected, 0.0);
  EXPECT_MAT_NEAR(block_diag({a, b}), expected, 0.0);
}

TEST(BlockAssemble, IdentityPaddedWithZeros) {
  const Mat out = block_assemble({{Mat::Identity(2, 2), Mat::Zero(2, 2)}});
  ASSERT_EQ(out.rows(), 2);
  ASSERT_EQ(out.cols(), 4);
  EXPECT_MAT_NEAR(out.leftCols(2), Mat::Identity(2, 2), 0.0);
  EXPECT_MAT_NEAR(out.rightCols(2), Mat::Zero(2, 2), 0.0);
}

// Kernel-basis stack [[A A_d 0]; [I]] for n = 2, N = 1 comes out 8x6.
TEST(BlockAssemble, KernelBasisDimensions) {
  std::mt19937 rng(7);
  const Mat a = random_mat(rng, 2, 2), ad = random_mat(rng, 2, 2);
  const Mat top = block_assemble({{a, ad, Mat::Zero(2, 2)}});
  const Mat m_perp = block_assemble({{top}, {Mat::Identity(6, 6)}});
  EXPECT_EQ(m_perp.rows(), 8);
  EXPECT_EQ(m_perp.cols(), 6);
}

TEST(BlockAssemble, InconsistentDimensionsThrow) {
  EXPECT_THROW(block_assemble({{Mat::Identity(2, 2), Mat::Identity(3, 3)}}), Error);
  // A fully-empty column cannot infer its width.
  EXPECT_THROW(block_assemble({{Mat(), Mat::Identity(2, 2)}, {Mat(), Mat::Identity(2, 2)}}), Error);
}

// Assembling nested sub-grids first yields identical entries.
TEST(BlockAssemble, AssociativityOverNestedGrids) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Index r0 = 1 + trial % 3, r1 = 2, c0 = 2, c1 = 1 + trial % 2;
    auto blk = [&](Index r, Index c) { return random_mat(rng, r, c); };
    const Mat a = blk(r0, c0), b = blk(r0, c1), c = blk(r1, c0), d = blk(r1, c1);
    const Mat flat = block_assemble({{a, b}, {c, d}});
    const Mat left = block_assemble({{a}, {c}});
    const Mat right = block_assemble({{b}, {d}});
    const Mat nested = block_assemble({{left, right}});
    EXPECT_MAT_NEAR(nested, flat, 0.0);
  }
}

TEST(He, Definition) {
  Mat p(2, 2);
  p << 1, 2, 0, 1;
  Mat expected(2, 2);
  expected << 2, 2, 2, 2;
  EXPECT_MAT_NEAR(he(p), expected, 0.0);
}

TEST(Abscissa, DiagonalMatrix) {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -2.0;
  EXPECT_NEAR(matrix_abscissa(a), -1.0, 1e-12);
}

}  // namespace
}  // namespace tdsyn
