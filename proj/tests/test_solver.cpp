#include "tdsyn/solve.hpp"

#include "tdsyn/bessel_legendre.hpp"
#include "tdsyn/fixtures.hpp"
#include "test_utils.hpp"

#include <gtest/gtest.h>

#include <random>

namespace tdsyn {
namespace {

using test::random_hurwitz;
using test::random_symmetric;

SdpProblem scalar_geq(double delta) {
  SdpProblem prob;
  const VarId x = prob.symmetric_variable("x", 1);
  AffineMatrixExpr e = AffineMatrixExpr::zero(1);
  e.add_term(Mat::Identity(1, 1), x, Mat::Identity(1, 1));
  prob.add_constraint(std::move(e), Sense::PosDefinite, "x_pos", delta);
  return prob;
}

TEST(Solver, ScalarFeasible) {
  const SdpProblem prob = scalar_geq(1e-6);
  const SolverResult res = solve(prob);
  ASSERT_EQ(res.status, SolveStatus::Feasible);
  EXPECT_GE(res.assignment.at("x")(0, 0), 1e-6);
  EXPECT_EQ(res.max_violation, 0.0);
}

TEST(Solver, ContradictorySensesInfeasible) {
  SdpProblem prob;
  const VarId x = prob.symmetric_variable("x", 1);
  for (Sense sense : {Sense::NegDefinite, Sense::PosDefinite}) {
    AffineMatrixExpr e = AffineMatrixExpr::zero(1);
    e.add_term(Mat::Identity(1, 1), x, Mat::Identity(1, 1));
    prob.add_constraint(std::move(e), sense, "", 1e-6);
  }
  EXPECT_EQ(solve(prob).status, SolveStatus::Infeasible);
}

// Lyapunov feasibility: He(A^T P) < 0 with P > 0 iff A is Hurwitz.
SdpProblem lyapunov_problem(const Mat& a) {
  SdpProblem prob;
  const Index n = a.rows();
  const VarId p = prob.symmetric_variable("P", n);
  AffineMatrixExpr pos = AffineMatrixExpr::zero(n);
  pos.add_term(Mat::Identity(n, n), p, Mat::Identity(n, n));
  prob.add_constraint(std::move(pos), Sense::PosDefinite, "P_pos");
  AffineMatrixExpr lyap = AffineMatrixExpr::zero(n);
  lyap.add_term(a.transpose(), p, Mat::Identity(n, n), false, true);
  prob.add_constraint(std::move(lyap), Sense::NegDefinite, "lyap");
  return prob;
}

TEST(Solver, LyapunovFeasibilityMatchesSpectrum) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + trial % 3;
    const Mat stable = random_hurwitz(rng, n);
    EXPECT_EQ(solve(lyapunov_problem(stable)).status, SolveStatus::Feasible) << stable;
    const Mat unstable = stable + (0.5 - matrix_abscissa(stable) + 0.3) * Mat::Identity(n, n);
    EXPECT_EQ(solve(lyapunov_problem(unstable)).status, SolveStatus::Infeasible) << unstable;
  }
}

TEST(Solver, FeasibleResultReevaluatesWithinTolerance) {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 8; ++trial) {
    const Mat a = random_hurwitz(rng, 3);
    const SdpProblem prob = lyapunov_problem(a);
    const SolverResult res = solve(prob);
    ASSERT_EQ(res.status, SolveStatus::Feasible);
    EXPECT_LE(prob.constraint_violation(res.assignment), 1e-7);
    EXPECT_GE(res.margin, 0.0);
  }
}

// Rebuilds a problem with every constraint expression multiplied by a
// positive scalar (congruence with sqrt(s) I keeps variable ids aligned).
SdpProblem scaled_copy(const SdpProblem& prob, double s) {
  SdpProblem out;
  for (const auto& v : prob.variables()) out.add_variable(v);
  for (const auto& c : prob.constraints()) {
    const Index d = c.expr.dim();
    out.add_constraint(c.expr.congruence(std::sqrt(s) * Mat::Identity(d, d)), c.sense, c.label);
  }
  return out;
}

TEST(Solver, StatusInvariantUnderExpressionScaling) {
  const DelaySystem sys = fixtures::example1();
  const Mat a_d = sys.delayed_matrix(fixtures::example1_reference_gain(1));
  for (double h : {3.0, 6.0}) {
    const SdpProblem prob = analysis_problem_projected(sys.a, a_d, 1, h);
    const SolveStatus reference = solve(prob).status;
    ASSERT_NE(reference, SolveStatus::Failed);
    for (double scale : {1e-2, 1e2})
      EXPECT_EQ(solve(scaled_copy(prob, scale)).status, reference)
          << "scale " << scale << " h " << h;
  }
}

TEST(Solver, DeterministicAcrossRuns) {
  std::mt19937 rng(37);
  const Mat a = random_hurwitz(rng, 3);
  const SdpProblem prob = lyapunov_problem(a);
  const SolverResult r1 = solve(prob);
  const SolverResult r2 = solve(prob);
  ASSERT_EQ(r1.status, r2.status);
  EXPECT_EQ(r1.iterations, r2.iterations);
  const Mat p1 = r1.assignment.at("P"), p2 = r2.assignment.at("P");
  EXPECT_MAT_NEAR(p1, p2, 0.0);
}

TEST(Solver, EmptyProblemFeasible) {
  SdpProblem prob;
  prob.symmetric_variable("P", 2);
  const SolverResult res = solve(prob);
  EXPECT_EQ(res.status, SolveStatus::Feasible);
  EXPECT_EQ(res.assignment.at("P").rows(), 2);
}

TEST(Solver, ConstantOnlyConstraint) {
  // No decision variables at all: the verdict is an eigenvalue check.
  SdpProblem feas;
  feas.add_constraint(AffineMatrixExpr(Mat(-Mat::Identity(2, 2))), Sense::NegDefinite, "", 1e-7);
  EXPECT_EQ(solve(feas).status, SolveStatus::Feasible);

  SdpProblem infeas;
  Mat c(2, 2);
  c << -1.0, 0.0, 0.0, 0.5;
  infeas.add_constraint(AffineMatrixExpr(c), Sense::NegDefinite, "", 1e-7);
  EXPECT_EQ(solve(infeas).status, SolveStatus::Infeasible);
}

TEST(Solver, HomogeneousCertificateIsModest) {
  // Certificates of homogeneous problems can be scaled arbitrarily; the
  // returned one should not carry box-sized entries.
  std::mt19937 rng(41);
  const Mat a = random_hurwitz(rng, 4);
  const SolverResult res = solve(lyapunov_problem(a));
  ASSERT_EQ(res.status, SolveStatus::Feasible);
  EXPECT_LE(res.assignment.at("P").cwiseAbs().maxCoeff(), 1e4);
}

}  // namespace
}  // namespace tdsyn
