#include "tdsyn/bessel_legendre.hpp"

#include <cmath>

namespace tdsyn {

int gamma_coeff(int N, int k, int i) {
  if (k < 0 || k > N || i < 0 || i > N - 1)
    throw Error(Errc::DimensionMismatch, "gamma_coeff: index out of range");
  if (i > k) return 0;
  const int parity = ((k + i) % 2 == 0) ? 1 : -1;
  return -(2 * i + 1) * (1 - parity);
}

Mat gamma_row(int N, int k, Index n) {
  const StateLayout layout{n, N};
  Mat row = Mat::Zero(n, layout.dim());
  const Mat id = Mat::Identity(n, n);
  row.middleCols(n, n) = id;
  row.middleCols(2 * n, n) = (k % 2 == 0 ? -1.0 : 1.0) * id;
  for (int i = 0; i < N; ++i)
    row.middleCols((3 + i) * n, n) = static_cast<double>(gamma_coeff(N, k, i)) * id;
  return row;
}

Mat CertificateMatrices::m_row(const Mat& a, const Mat& a_d) const {
  const Index n = layout.n;
  Mat m = Mat::Zero(n, layout.dim());
  m.leftCols(n).setIdentity();
  m.middleCols(n, n) = -a;
  m.middleCols(2 * n, n) = -a_d;
  return m;
}

Mat CertificateMatrices::m_perp(const Mat& a, const Mat& a_d) const {
  const Index n = layout.n;
  const Index cols = layout.dim() - n;
  Mat mp = Mat::Zero(layout.dim(), cols);
  mp.block(0, 0, n, n) = a;
  mp.block(0, n, n, n) = a_d;
  mp.bottomRows(cols).setIdentity();
  return mp;
}

CertificateMatrices certificate_matrices(int N, Index n, double h) {
  if (N < 1) throw Error(Errc::DimensionMismatch, "certificate_matrices: N >= 1 required");
  if (n < 1) throw Error(Errc::DimensionMismatch, "certificate_matrices: n >= 1 required");
  if (!(h > 0.0)) throw Error(Errc::DimensionMismatch, "certificate_matrices: h > 0 required");

  CertificateMatrices tm;
  tm.layout = {n, N};
  tm.h = h;
  const Index dim = tm.layout.dim();

  tm.f = Mat::Zero(n, dim);
  tm.f.leftCols(n).setIdentity();

  tm.g = Mat::Zero((N + 1) * n, dim);
  tm.g.block(0, n, n, n).setIdentity();
  for (int i = 0; i < N; ++i)
    tm.g.block((1 + i) * n, (3 + i) * n, n, n) = h * Mat::Identity(n, n);

  tm.gamma.reserve(N + 1);
  for (int k = 0; k <= N; ++k) tm.gamma.push_back(gamma_row(N, k, n));

  tm.hrow = Mat::Zero((N + 1) * n, dim);
  tm.hrow.topRows(n) = tm.f;
  for (int k = 0; k < N; ++k) tm.hrow.middleRows((1 + k) * n, n) = tm.gamma[k];

  return tm;
}

AffineMatrixExpr build_phi(const CertificateMatrices& tm, const PhiVars& vars) {
  const Index n = tm.layout.n;
  const Index dim = tm.layout.dim();
  AffineMatrixExpr phi = AffineMatrixExpr::zero(dim);

  // He(G^T P H)
  phi.add_term(tm.g.transpose(), vars.p, tm.hrow, false, true);

  // S tilde = diag(0, S, -S, 0)
  const Mat e1 = tm.layout.slot(1);
  const Mat e2 = tm.layout.slot(2);
  phi.add_term(e1.transpose(), vars.s, e1);
  phi.add_term(-e2.transpose(), vars.s, e2);

  // h^2 F^T R F
  phi.add_term(tm.h * tm.h * tm.f.transpose(), vars.r, tm.f);

  // - sum_k (2k+1) Gamma(k)^T R Gamma(k)
  for (std::size_t k = 0; k < tm.gamma.size(); ++k) {
    const double w = 2.0 * static_cast<double>(k) + 1.0;
    phi.add_term(-w * tm.gamma[k].transpose(), vars.r, tm.gamma[k]);
  }
  return phi;
}

namespace {

void check_system(const Mat& a, const Mat& a_d) {
  if (a.rows() != a.cols() || a_d.rows() != a_d.cols() || a.rows() != a_d.rows())
    throw Error(Errc::DimensionMismatch, "analysis: A and A_d must be square of equal size");
  if (!all_finite(a) || !all_finite(a_d))
    throw Error(Errc::DimensionMismatch, "analysis: non-finite entries");
}

SdpProblem analysis_base(const Mat& a, int N, double delta_scale, PhiVars& vars) {
  SdpProblem prob;
  prob.delta_scale = delta_scale;
  const Index n = a.rows();
  vars.p = prob.symmetric_variable("P", (N + 1) * n);
  vars.s = prob.symmetric_variable("S", n);
  vars.r = prob.symmetric_variable("R", n);

  auto pos = [&](VarId v, Index sz, const std::string& label) {
    AffineMatrixExpr e = AffineMatrixExpr::zero(sz);
    e.add_term(Mat::Identity(sz, sz), v, Mat::Identity(sz, sz));
    prob.add_constraint(std::move(e), Sense::PosDefinite, label);
  };
  pos(vars.p, (N + 1) * n, "P_pos");
  pos(vars.s, n, "S_pos");
  pos(vars.r, n, "R_pos");
  return prob;
}

}  // namespace

SdpProblem analysis_problem_projected(const Mat& a, const Mat& a_d, int N, double h,
                                      double delta_scale) {
  check_system(a, a_d);
  PhiVars vars{};
  SdpProblem prob = analysis_base(a, N, delta_scale, vars);
  const CertificateMatrices tm = certificate_matrices(N, a.rows(), h);
  const AffineMatrixExpr phi = build_phi(tm, vars);
  prob.add_constraint(phi.congruence(tm.m_perp(a, a_d)), Sense::NegDefinite, "phi_projected");
  return prob;
}

SdpProblem analysis_problem_slack(const Mat& a, const Mat& a_d, int N, double h,
                                  double delta_scale) {
  check_system(a, a_d);
  PhiVars vars{};
  SdpProblem prob = analysis_base(a, N, delta_scale, vars);
  const CertificateMatrices tm = certificate_matrices(N, a.rows(), h);
  const VarId y = prob.full_variable("Y", a.rows(), tm.layout.dim());

  AffineMatrixExpr phi = build_phi(tm, vars);
  // He(M^T Y)
  phi.add_term(tm.m_row(a, a_d).transpose(), y, Mat::Identity(tm.layout.dim(), tm.layout.dim()),
               false, true);
  prob.add_constraint(std::move(phi), Sense::NegDefinite, "phi_slack");
  return prob;
}

MaxDelayResult max_delay_analysis(const Mat& a, const Mat& a_d, int N, const MaxDelayOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error(Errc::DimensionMismatch, "max_delay_analysis: tol > 0 required");
  MaxDelayResult res;

  auto feasible_at = [&](double h) {
    SdpProblem prob = analysis_problem_projected(a, a_d, N, h, opts.delta_scale);
    ++res.solves;
    return solve(prob, opts.solver).status == SolveStatus::Feasible;
  };

  double lo = opts.h_probe;
  if (!feasible_at(lo))
    throw Error(Errc::NotStableAtZero,
                "analysis infeasible at the h -> 0+ probe (h = " + std::to_string(lo) + ")");

  double hi = lo;
  while (true) {
    const double cand = std::min(2.0 * hi, opts.h_cap);
    if (feasible_at(cand)) {
      lo = hi = cand;
      if (cand >= opts.h_cap) {
        res.h_max = opts.h_cap;
        res.capped = true;
        return res;
      }
    } else {
      hi = cand;
      break;
    }
  }

  while (hi - lo > opts.tol) {
    const double mid = 0.5 * (lo + hi);
    if (feasible_at(mid))
      lo = mid;
    else
      hi = mid;
  }
  res.h_max = lo;
  res.h_infeasible = hi;
  return res;
}

}  // namespace tdsyn
