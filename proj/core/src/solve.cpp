#include "tdsyn/solve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace tdsyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Layout of the scalarized unknowns: one entry per free scalar of every
// declared variable, the margin unknown t last.
struct ScalarEntry {
  VarId var;
  Index i, j;      // matrix position (i <= j for symmetric)
  bool pair;       // symmetric off-diagonal: mirrors to (j, i)
};

struct Scalarization {
  std::vector<ScalarEntry> entries;          // size m
  std::vector<Index> var_offset;             // first scalar of each var
  int m = 0;
};

Scalarization scalarize(const SdpProblem& p) {
  Scalarization s;
  for (VarId v = 0; v < p.variables().size(); ++v) {
    const DecisionVar& dv = p.variables()[v];
    s.var_offset.push_back(static_cast<Index>(s.entries.size()));
    switch (dv.structure) {
      case VarStructure::Scalar:
        s.entries.push_back({v, 0, 0, false});
        break;
      case VarStructure::Full:
        for (Index i = 0; i < dv.rows; ++i)
          for (Index j = 0; j < dv.cols; ++j) s.entries.push_back({v, i, j, false});
        break;
      case VarStructure::Symmetric:
        for (Index i = 0; i < dv.rows; ++i)
          for (Index j = i; j < dv.cols; ++j) s.entries.push_back({v, i, j, i != j});
        break;
      case VarStructure::BlockDiagonal:
        for (const auto& [off, size] : dv.blocks)
          for (Index i = 0; i < size; ++i)
            for (Index j = 0; j < size; ++j) s.entries.push_back({v, off + i, off + j, false});
        break;
    }
  }
  s.m = static_cast<int>(s.entries.size());
  return s;
}

Assignment unscalarize(const SdpProblem& p, const Scalarization& s, const Vec& x) {
  Assignment a;
  for (const auto& dv : p.variables()) a[dv.name] = Mat::Zero(dv.rows, dv.cols);
  for (int k = 0; k < s.m; ++k) {
    const ScalarEntry& e = s.entries[k];
    Mat& val = a[p.variables()[e.var].name];
    val(e.i, e.j) = x[k];
    if (e.pair) val(e.j, e.i) = x[k];
  }
  return a;
}

// One semidefinite block of the internal form Z(y) = F0 + sum_i y_i F_i >= 0.
struct DenseBlock {
  Index dim = 0;
  Mat f0;
  std::vector<std::pair<int, Mat>> coeff;  // scalar index -> symmetric coefficient
};

// Diagonal block; every diagonal entry depends on at most one unknown.
struct DiagBlock {
  Vec f0;
  std::vector<std::pair<int, double>> coeff;  // per entry: (unknown, coefficient)
};

struct InternalForm {
  int nvar = 0;  // m + 1, margin variable last
  std::vector<DenseBlock> dense;
  DiagBlock box;
  Vec b;
  double delta_norm_min = kInf;  // smallest per-block margin after normalization
};

// Coefficient matrix of scalar k in `expr` restricted to one constraint.
void accumulate_coeffs(const SdpProblem& p, const Scalarization& s, const AffineMatrixExpr& expr,
                       double sign, std::vector<Mat>& out) {
  const Index d = expr.dim();
  for (const auto& t : expr.terms()) {
    const DecisionVar& v = p.variables()[t.var];
    const Index base = s.var_offset[t.var];
    if (v.structure == VarStructure::Scalar) {
      Mat c = t.left * t.right;
      if (t.symmetrize) c += c.transpose().eval();
      if (out[base].size() == 0) out[base] = Mat::Zero(d, d);
      out[base] += sign * c;
      continue;
    }
    const Index count = v.scalar_count();
    for (Index k = 0; k < count; ++k) {
      const ScalarEntry& e = s.entries[base + k];
      Index bi = e.i, bj = e.j;
      if (t.transpose_var) std::swap(bi, bj);
      Mat c = t.left.col(bi) * t.right.row(bj);
      if (e.pair) {
        Index bi2 = e.j, bj2 = e.i;
        if (t.transpose_var) std::swap(bi2, bj2);
        c += t.left.col(bi2) * t.right.row(bj2);
      }
      if (t.symmetrize) c += c.transpose().eval();
      if (out[base + k].size() == 0) out[base + k] = Mat::Zero(d, d);
      out[base + k] += sign * c;
    }
  }
}

InternalForm build_internal(const SdpProblem& p, const Scalarization& s, const SolverOptions& opt) {
  InternalForm f;
  f.nvar = s.m + 1;
  const int t_idx = s.m;

  for (const auto& c : p.constraints()) {
    const double sign = c.sense == Sense::NegDefinite ? -1.0 : 1.0;
    const Index d = c.expr.dim();
    Mat f0 = sign * c.expr.constant() - c.delta * Mat::Identity(d, d);
    std::vector<Mat> coeffs(static_cast<std::size_t>(s.m));
    accumulate_coeffs(p, s, c.expr, sign, coeffs);

    DenseBlock blk;
    blk.dim = d;
    double scale = std::max(1.0, f0.norm());
    for (int k = 0; k < s.m; ++k)
      if (coeffs[k].size() != 0) scale = std::max(scale, coeffs[k].norm());

    blk.f0 = 0.5 * (f0 + f0.transpose()) / scale;
    f.delta_norm_min = std::min(f.delta_norm_min, c.delta / scale);
    const double asym0 = (f0 - f0.transpose()).norm();
    if (asym0 > 1e-9 * scale)
      throw Error(Errc::ShapeMismatch, "constraint '" + c.label + "' has a non-symmetric constant");
    for (int k = 0; k < s.m; ++k) {
      if (coeffs[k].size() == 0) continue;
      const double asym = (coeffs[k] - coeffs[k].transpose()).norm();
      if (asym > 1e-9 * std::max(1.0, coeffs[k].norm()))
        throw Error(Errc::ShapeMismatch,
                    "constraint '" + c.label + "' is not structurally symmetric in an unknown");
      Mat sym = 0.5 * (coeffs[k] + coeffs[k].transpose()) / scale;
      if (sym.norm() > 0.0) blk.coeff.emplace_back(k, std::move(sym));
    }
    blk.coeff.emplace_back(t_idx, (-1.0 / 1.0) * Mat::Identity(d, d));
    f.dense.push_back(std::move(blk));
  }

  // Box |x_k| <= rho and t <= cap, each entry normalized to f0 = 1.
  f.box.f0 = Vec::Ones(2 * s.m + 1);
  f.box.coeff.resize(2 * s.m + 1);
  for (int k = 0; k < s.m; ++k) {
    f.box.coeff[2 * k] = {k, 1.0 / opt.box_radius};        // rho + x_k >= 0
    f.box.coeff[2 * k + 1] = {k, -1.0 / opt.box_radius};   // rho - x_k >= 0
  }
  f.box.coeff[2 * s.m] = {t_idx, -1.0 / opt.margin_cap};   // cap - t >= 0

  f.b = Vec::Zero(f.nvar);
  f.b[t_idx] = 1.0;
  return f;
}

struct IpmState {
  std::vector<Mat> X, Z;
  Vec xd, zd;  // diagonal block
  Vec y;
};

struct IpmOutcome {
  bool converged = false;
  double relgap = kInf;
  double pinfeas = kInf;
  double dinfeas = kInf;
  int iterations = 0;
};

double total_dim(const InternalForm& f) {
  double n = static_cast<double>(f.box.f0.size());
  for (const auto& b : f.dense) n += static_cast<double>(b.dim);
  return n;
}

// Largest alpha with M + alpha*D staying positive semidefinite.
double max_step_sym(const Mat& m, const Mat& d) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const Mat l = llt.matrixL();
  Mat w = l.triangularView<Eigen::Lower>().solve(d);
  w = l.triangularView<Eigen::Lower>().solve(w.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

double max_step_diag(const Vec& v, const Vec& dv) {
  double a = kInf;
  for (Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

IpmOutcome run_ipm(const InternalForm& f, const SolverOptions& opt, IpmState& st) {
  const int nv = f.nvar;
  const double dtot = total_dim(f);
  const std::size_t nb = f.dense.size();

  // Initial iterates scaled from the problem data.
  st.X.resize(nb);
  st.Z.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const auto& blk = f.dense[k];
    double zscale = std::max(1.0, blk.f0.norm());
    for (const auto& [idx, c] : blk.coeff) zscale = std::max(zscale, c.norm());
    st.Z[k] = 2.0 * zscale * Mat::Identity(blk.dim, blk.dim);
    st.X[k] = 2.0 * Mat::Identity(blk.dim, blk.dim);
  }
  st.xd = Vec::Ones(f.box.f0.size());
  st.zd = Vec::Ones(f.box.f0.size());
  st.y = Vec::Zero(nv);

  IpmOutcome out;
  const double bnorm = 1.0 + f.b.norm();

  std::vector<Mat> Rd(nb);
  Vec rd_diag;
  std::vector<std::vector<Mat>> W(nb);  // per block, per local coeff: Z^-1 F_i X

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    out.iterations = iter;

    // Residuals.
    Vec rp = -f.b;  // rp_i = -b_i - <F_i, X>
    double f0x = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& blk = f.dense[k];
      f0x += blk.f0.cwiseProduct(st.X[k]).sum();
      for (const auto& [idx, c] : blk.coeff) rp[idx] -= c.cwiseProduct(st.X[k]).sum();
      Rd[k] = blk.f0 - st.Z[k];
      for (const auto& [idx, c] : blk.coeff) Rd[k] += st.y[idx] * c;
    }
    rd_diag = f.box.f0 - st.zd;
    for (Index d = 0; d < f.box.f0.size(); ++d) {
      const auto& [idx, c] = f.box.coeff[d];
      rd_diag[d] += st.y[idx] * c;
      rp[idx] -= c * st.xd[d];
      f0x += f.box.f0[d] * st.xd[d];
    }

    double gap = st.xd.dot(st.zd);
    for (std::size_t k = 0; k < nb; ++k) gap += st.X[k].cwiseProduct(st.Z[k]).sum();
    const double mu = gap / dtot;

    const double pobj = f.b.dot(st.y);
    double dnorm = rd_diag.lpNorm<Eigen::Infinity>();
    for (std::size_t k = 0; k < nb; ++k) dnorm = std::max(dnorm, Rd[k].lpNorm<Eigen::Infinity>());

    out.relgap = std::abs(gap) / (1.0 + std::abs(pobj) + std::abs(f0x));
    out.pinfeas = rp.lpNorm<Eigen::Infinity>() / bnorm;
    out.dinfeas = dnorm;

    if (opt.verbose)
      std::fprintf(stderr, "ipm %3d: gap %9.2e pinf %9.2e dinf %9.2e t %12.5e\n", iter, out.relgap,
                   out.pinfeas, out.dinfeas, st.y[nv - 1]);

    if (out.relgap < opt.gap_tol && out.pinfeas < opt.feas_tol && out.dinfeas < opt.feas_tol) {
      out.converged = true;
      return out;
    }

    // Factor Z and cache Z^-1 F_i X products.
    std::vector<Eigen::LLT<Mat>> llt(nb);
    bool fail = false;
    for (std::size_t k = 0; k < nb; ++k) {
      llt[k].compute(st.Z[k]);
      if (llt[k].info() != Eigen::Success) {
        fail = true;
        break;
      }
    }
    if (fail) return out;

    std::vector<Mat> zinv(nb);
    for (std::size_t k = 0; k < nb; ++k)
      zinv[k] = llt[k].solve(Mat::Identity(f.dense[k].dim, f.dense[k].dim));

    Mat schur = Mat::Zero(nv, nv);
    Vec avec = Vec::Zero(nv);  // a_i = <F_i, Z^-1>
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& blk = f.dense[k];
      const std::size_t nc = blk.coeff.size();
      W[k].resize(nc);
      for (std::size_t a = 0; a < nc; ++a)
        W[k][a] = llt[k].solve(blk.coeff[a].second) * st.X[k];
      for (std::size_t a = 0; a < nc; ++a) {
        const int ia = blk.coeff[a].first;
        avec[ia] += blk.coeff[a].second.cwiseProduct(zinv[k]).sum();
        for (std::size_t c = 0; c <= a; ++c) {
          const int ic = blk.coeff[c].first;
          const double o = blk.coeff[a].second.cwiseProduct(W[k][c].transpose()).sum();
          schur(ia, ic) += o;
          if (ia != ic) schur(ic, ia) += o;
        }
      }
    }
    for (Index d = 0; d < f.box.f0.size(); ++d) {
      const auto& [idx, c] = f.box.coeff[d];
      schur(idx, idx) += c * c * st.xd[d] / st.zd[d];
      avec[idx] += c / st.zd[d];
    }

    const Mat schur_sym = 0.5 * (schur + schur.transpose());
    Eigen::LDLT<Mat> sfac(schur_sym);
    if (sfac.info() != Eigen::Success) return out;

    // Degenerate modeling (collinear coefficients) can leave the Schur
    // system near-singular; fall back to a ridged factorization.
    auto schur_solve = [&](const Vec& q) -> Vec {
      Vec dy = sfac.solve(q);
      if (dy.allFinite() && (schur_sym * dy - q).norm() <= 1e-7 * (1.0 + q.norm())) return dy;
      const double ridge = 1e-12 * std::max(1.0, schur_sym.diagonal().cwiseAbs().maxCoeff());
      Eigen::LDLT<Mat> ridged(schur_sym + ridge * Mat::Identity(nv, nv));
      return ridged.solve(q);
    };

    auto solve_direction = [&](double sigma_mu, const std::vector<Mat>& corr,
                               const Vec& corr_diag, std::vector<Mat>& dX, std::vector<Mat>& dZ,
                               Vec& dxd, Vec& dzd, Vec& dy) -> bool {
      Vec q = f.b + sigma_mu * avec;
      for (std::size_t k = 0; k < nb; ++k) {
        Mat inner = Rd[k] * st.X[k];
        if (corr.size() == nb && corr[k].size() != 0) inner += corr[k];
        const Mat pmat = llt[k].solve(inner);
        for (const auto& [idx, c] : f.dense[k].coeff)
          q[idx] -= c.cwiseProduct(pmat.transpose()).sum();
      }
      for (Index d = 0; d < f.box.f0.size(); ++d) {
        const auto& [idx, c] = f.box.coeff[d];
        double inner = rd_diag[d] * st.xd[d];
        if (corr_diag.size() == f.box.f0.size()) inner += corr_diag[d];
        q[idx] -= c * inner / st.zd[d];
      }
      dy = schur_solve(q);
      if (!dy.allFinite()) return false;

      dX.resize(nb);
      dZ.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const auto& blk = f.dense[k];
        dZ[k] = Rd[k];
        for (const auto& [idx, c] : blk.coeff) dZ[k] += dy[idx] * c;
        Mat inner = dZ[k] * st.X[k];
        if (corr.size() == nb && corr[k].size() != 0) inner += corr[k];
        Mat dx = sigma_mu * zinv[k] - st.X[k] - llt[k].solve(inner);
        dX[k] = 0.5 * (dx + dx.transpose());
      }
      dzd = rd_diag;
      dxd.resize(f.box.f0.size());
      for (Index d = 0; d < f.box.f0.size(); ++d) {
        const auto& [idx, c] = f.box.coeff[d];
        dzd[d] += dy[idx] * c;
        double inner = dzd[d] * st.xd[d];
        if (corr_diag.size() == f.box.f0.size()) inner += corr_diag[d];
        dxd[d] = (sigma_mu - inner) / st.zd[d] - st.xd[d];
      }
      return dxd.allFinite();
    };

    // Predictor.
    std::vector<Mat> dXa, dZa;
    Vec dxda, dzda, dya;
    if (!solve_direction(0.0, {}, Vec(), dXa, dZa, dxda, dzda, dya)) return out;

    double ap = max_step_diag(st.xd, dxda), ad = max_step_diag(st.zd, dzda);
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step_sym(st.X[k], dXa[k]));
      ad = std::min(ad, max_step_sym(st.Z[k], dZa[k]));
    }
    ap = std::min(1.0, opt.step_fraction * ap);
    ad = std::min(1.0, opt.step_fraction * ad);

    double gap_aff = (st.xd + ap * dxda).dot(st.zd + ad * dzda);
    for (std::size_t k = 0; k < nb; ++k)
      gap_aff += (st.X[k] + ap * dXa[k]).cwiseProduct(st.Z[k] + ad * dZa[k]).sum();
    double sigma = std::pow(std::max(0.0, gap_aff) / gap, 3);
    sigma = std::clamp(sigma, 1e-6, 0.9);

    // Corrector with the Mehrotra second-order term.
    std::vector<Mat> corr(nb);
    for (std::size_t k = 0; k < nb; ++k) corr[k] = dZa[k] * dXa[k];
    Vec corr_diag = dzda.cwiseProduct(dxda);

    std::vector<Mat> dX, dZ;
    Vec dxd, dzd, dy;
    if (!solve_direction(sigma * mu, corr, corr_diag, dX, dZ, dxd, dzd, dy)) return out;

    ap = max_step_diag(st.xd, dxd);
    ad = max_step_diag(st.zd, dzd);
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step_sym(st.X[k], dX[k]));
      ad = std::min(ad, max_step_sym(st.Z[k], dZ[k]));
    }
    ap = std::min(1.0, opt.step_fraction * ap);
    ad = std::min(1.0, opt.step_fraction * ad);
    if (ap <= 1e-14 && ad <= 1e-14) return out;  // stalled

    for (std::size_t k = 0; k < nb; ++k) {
      st.X[k] += ap * dX[k];
      st.Z[k] += ad * dZ[k];
    }
    st.xd += ap * dxd;
    st.zd += ad * dzd;
    st.y += ad * dy;
  }
  return out;
}

}  // namespace

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Inaccurate: return "inaccurate";
    case SolveStatus::Failed: return "failed";
  }
  return "unknown";
}

SolverResult solve(const SdpProblem& problem, const SolverOptions& options) {
  SolverResult res;
  const Scalarization sc = scalarize(problem);

  if (problem.constraints().empty()) {
    res.status = SolveStatus::Feasible;
    res.assignment = unscalarize(problem, sc, Vec::Zero(sc.m));
    res.margin = options.margin_cap;
    return res;
  }

  const InternalForm form = build_internal(problem, sc, options);
  IpmState st;
  const IpmOutcome out = run_ipm(form, options, st);
  res.iterations = out.iterations;

  const double t_star = st.y.size() ? st.y[form.nvar - 1] : -kInf;
  res.margin = t_star;

  Vec x = st.y.head(sc.m);
  res.box_active = sc.m > 0 && x.lpNorm<Eigen::Infinity>() > 0.99 * options.box_radius;
  res.assignment = unscalarize(problem, sc, x);

  const double delta_min = form.delta_norm_min;

  if (t_star >= -1e-12) {
    // A verified witness settles feasibility regardless of convergence flags.
    double viol = problem.constraint_violation(res.assignment);
    if (viol <= options.verify_tol) {
      res.status = SolveStatus::Feasible;

      // Homogeneous problems admit arbitrary certificate scaling; shrink
      // large certificates while keeping a comfortable margin multiple.
      if (options.normalize_homogeneous && sc.m > 0) {
        bool homogeneous = true;
        for (const auto& c : problem.constraints())
          if (c.expr.constant().norm() != 0.0) homogeneous = false;
        const double xmax = x.lpNorm<Eigen::Infinity>();
        if (homogeneous && xmax > 1e3) {
          double worst_ratio = kInf;  // achieved margin / required delta
          for (const auto& c : problem.constraints()) {
            const Mat val = problem.evaluate(c.expr, res.assignment);
            const double m = c.sense == Sense::NegDefinite ? -sym_eig_max(val) : sym_eig_min(val);
            worst_ratio = std::min(worst_ratio, m / c.delta);
          }
          if (worst_ratio > 0.0) {
            const double c_scale = std::clamp(std::max(1e3 / xmax, 100.0 / worst_ratio), 0.0, 1.0);
            if (c_scale < 1.0) {
              Vec xs = c_scale * x;
              Assignment scaled = unscalarize(problem, sc, xs);
              if (problem.constraint_violation(scaled) <= options.verify_tol) {
                res.assignment = std::move(scaled);
                viol = problem.constraint_violation(res.assignment);
              }
            }
          }
        }
      }
      res.max_violation = viol;
      return res;
    }
    res.status = out.converged ? SolveStatus::Inaccurate : SolveStatus::Failed;
    res.max_violation = viol;
    return res;
  }

  res.max_violation = problem.constraint_violation(res.assignment);

  // Infeasibility rests on the converged objective: the margin shortfall must
  // clear half the designed separation buffer.
  const bool gap_converged = out.relgap <= std::max(1e-6, 100.0 * options.gap_tol) &&
                             out.dinfeas <= 1e-5 && out.pinfeas <= 1e-4;
  if (gap_converged && t_star < -0.5 * delta_min) {
    res.status = SolveStatus::Infeasible;
    return res;
  }
  res.status = (gap_converged || out.converged) ? SolveStatus::Inaccurate : SolveStatus::Failed;
  return res;
}

}  // namespace tdsyn
