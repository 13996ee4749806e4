#pragma once

#include "tdsyn/lmi.hpp"
#include "tdsyn/solve.hpp"

namespace tdsyn {

/// Layout of the extended state
/// [xdot(0), x(0), x(-h), (1/h)*Omega_0, ..., (1/h)*Omega_{N-1}]
/// where Omega_i are the Legendre projections of the state history. Total
/// dimension n*(N+3).
struct StateLayout {
  Index n = 0;
  int order = 1;  // N >= 1

  Index slot_count() const { return static_cast<Index>(order) + 3; }
  Index dim() const { return n * slot_count(); }
  Mat slot(Index s) const { return selector(s * n, n, dim()); }
};

/// gamma_{Nk}^i = -(2i+1)(1-(-1)^{k+i}) for i <= k, else 0.
int gamma_coeff(int N, int k, int i);

/// Gamma_N(k) = [0 I (-1)^{k+1} I  gamma^0 I ... gamma^{N-1} I], n x n(N+3).
Mat gamma_row(int N, int k, Index n);

/// The structure matrices of the order-N stability condition.
struct CertificateMatrices {
  StateLayout layout;
  double h = 0.0;
  Mat f;                   // F_N  : n x n(N+3)
  Mat g;                   // G_N  : (N+1)n x n(N+3)
  Mat hrow;                // H_N  : (N+1)n x n(N+3)
  std::vector<Mat> gamma;  // Gamma_N(0..N)

  Mat m_row(const Mat& a, const Mat& a_d) const;   // [I -A -A_d 0]
  Mat m_perp(const Mat& a, const Mat& a_d) const;  // [[A A_d 0]; I_{(N+2)n}]
};

CertificateMatrices certificate_matrices(int N, Index n, double h);

struct PhiVars {
  VarId p;  // P_N in S^{(N+1)n}
  VarId s;  // S in S^n
  VarId r;  // R in S^n
};

/// Phi_N = He(G^T P H) + diag(0, S, -S, 0) + h^2 F^T R F
///         - sum_k (2k+1) Gamma(k)^T R Gamma(k).
AffineMatrixExpr build_phi(const CertificateMatrices& tm, const PhiVars& vars);

/// Feasibility problem M_perp^T Phi_N M_perp < 0, P_N > 0, S > 0, R > 0.
SdpProblem analysis_problem_projected(const Mat& a, const Mat& a_d, int N, double h,
                                      double delta_scale = 1e-7);

/// Slack form Phi_N + He(M^T Y) < 0 with free Y (n x n(N+3)).
SdpProblem analysis_problem_slack(const Mat& a, const Mat& a_d, int N, double h,
                                  double delta_scale = 1e-7);

struct MaxDelayOptions {
  double tol = 1e-3;
  double h_probe = 1e-3;
  double h_cap = 100.0;
  double delta_scale = 1e-7;
  SolverOptions solver;
};

struct MaxDelayResult {
  double h_max = 0.0;         // largest delay certified feasible
  double h_infeasible = 0.0;  // first probe found infeasible (0 if capped)
  bool capped = false;
  int solves = 0;
};

/// Largest h certified by the projected analysis problem, located by
/// geometric bracketing from a feasible probe followed by bisection. Reports
/// only the certified interval; no monotonicity beyond the first infeasible
/// probe is assumed. Throws Errc::NotStableAtZero when the probe fails.
MaxDelayResult max_delay_analysis(const Mat& a, const Mat& a_d, int N,
                                  const MaxDelayOptions& opts = {});

}  // namespace tdsyn
