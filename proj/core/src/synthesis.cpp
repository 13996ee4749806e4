#include "tdsyn/synthesis.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>

namespace tdsyn {

void DelaySystem::validate() const {
  if (a.rows() != a.cols()) throw Error(Errc::DimensionMismatch, "system: A must be square");
  if (b.rows() != a.rows()) throw Error(Errc::DimensionMismatch, "system: B row count");
  if (c.cols() != a.rows()) throw Error(Errc::DimensionMismatch, "system: C column count");
  if (a1 && (a1->rows() != a.rows() || a1->cols() != a.cols()))
    throw Error(Errc::DimensionMismatch, "system: A1 must match A");
  if (!all_finite(a) || !all_finite(b) || !all_finite(c) || (a1 && !all_finite(*a1)))
    throw Error(Errc::DimensionMismatch, "system: non-finite entries");
}

Mat DelaySystem::delayed_matrix(const Mat& k) const {
  if (k.rows() != inputs() || k.cols() != outputs())
    throw Error(Errc::DimensionMismatch, "gain shape does not match plant");
  Mat d = b * k * c;
  if (a1) d += *a1;
  return d;
}

DelaySystem DelaySystem::state_feedback(Mat a, Mat b) {
  DelaySystem s{std::move(a), std::move(b), Mat(), std::nullopt};
  s.c = Mat::Identity(s.a.rows(), s.a.rows());
  s.validate();
  return s;
}

Mat initial_gain(const Mat& a, const Mat& b, const SolverOptions& options) {
  const Index n = a.rows(), m = b.cols();
  if (b.rows() != n) throw Error(Errc::DimensionMismatch, "initial_gain: B row count");
  if (matrix_abscissa(a) < 0.0) return Mat::Zero(m, n);

  SdpProblem prob;
  const VarId q = prob.symmetric_variable("Q", n);
  const VarId z = prob.full_variable("Z", m, n);

  AffineMatrixExpr qpos = AffineMatrixExpr::zero(n);
  qpos.add_term(Mat::Identity(n, n), q, Mat::Identity(n, n));
  prob.add_constraint(std::move(qpos), Sense::PosDefinite, "Q_pos");

  AffineMatrixExpr lyap = AffineMatrixExpr::zero(n);
  lyap.add_term(a, q, Mat::Identity(n, n), false, true);  // He(A Q)
  lyap.add_term(b, z, Mat::Identity(n, n), false, true);  // He(B Z)
  prob.add_constraint(std::move(lyap), Sense::NegDefinite, "lyapunov");

  const SolverResult res = solve(prob, options);
  if (res.status != SolveStatus::Feasible)
    throw Error(Errc::NotStabilizable, "delay-free stabilization LMI infeasible");
  const Mat qv = res.assignment.at("Q");
  const Mat zv = res.assignment.at("Z");
  const Mat k0 = zv * qv.inverse();
  if (!all_finite(k0) || matrix_abscissa(a + b * k0) >= 0.0)
    throw Error(Errc::NotStabilizable, "recovered delay-free gain failed verification");
  return k0;
}

namespace {

// M script = [I -A~ (-A1~) 0...] of the synthesis condition; the third block
// is populated only for the delayed-state-matrix variant.
Mat m_script(const DelaySystem& sys, const RealJordanForm& jordan, Index dim) {
  const Index n = sys.n();
  Mat m = Mat::Zero(n, dim);
  m.leftCols(n).setIdentity();
  m.middleCols(n, n) = -jordan.transform_inv * sys.a * jordan.transform;
  if (sys.a1) m.middleCols(2 * n, n) = -jordan.transform_inv * (*sys.a1) * jordan.transform;
  return m;
}

SynthesisProblem synthesis_base(const DelaySystem& sys, const RealJordanForm& jordan, int N,
                                double h, const Mat& f_w, double delta_scale, bool sof) {
  sys.validate();
  const Index n = sys.n();
  const CertificateMatrices tm = certificate_matrices(N, n, h);
  const Index dim = tm.layout.dim();
  if (f_w.rows() != n || f_w.cols() != dim)
    throw Error(Errc::ShapeMismatch, "synthesis: F_W must be n x n(N+3)");

  SynthesisProblem sp;
  SdpProblem& prob = sp.problem;
  prob.delta_scale = delta_scale;

  sp.vars.phi.p = prob.symmetric_variable("P", (N + 1) * n);
  sp.vars.phi.s = prob.symmetric_variable("S", n);
  sp.vars.phi.r = prob.symmetric_variable("R", n);
  auto pos = [&](VarId v, Index sz, const std::string& label) {
    AffineMatrixExpr e = AffineMatrixExpr::zero(sz);
    e.add_term(Mat::Identity(sz, sz), v, Mat::Identity(sz, sz));
    prob.add_constraint(std::move(e), Sense::PosDefinite, label);
  };
  pos(sp.vars.phi.p, (N + 1) * n, "P_pos");
  pos(sp.vars.phi.s, n, "S_pos");
  pos(sp.vars.phi.r, n, "R_pos");

  AffineMatrixExpr lmi = build_phi(tm, sp.vars.phi);
  const Mat mscript = m_script(sys, jordan, dim);
  const Mat btilde = jordan.transform_inv * sys.b;
  const Mat e2 = tm.layout.slot(2);

  if (sof) {
    sp.vars.sigma = prob.scalar_variable("sigma");
    // He((sigma M)^T F_W)
    lmi.add_term(mscript.transpose(), *sp.vars.sigma, f_w, false, true);
    // He(([0 0 -B~ Kbar C~ 0])^T F_W)
    sp.vars.kbar = prob.full_variable("Kbar", sys.inputs(), sys.outputs());
    const Mat ctilde = sys.c * jordan.transform;
    lmi.add_term(-e2.transpose() * ctilde.transpose(), sp.vars.kbar, btilde.transpose() * f_w, true,
                 true);
  } else {
    std::vector<std::pair<Index, Index>> pattern;
    for (const auto& g : jordan.groups) pattern.emplace_back(g.start, g.size);
    sp.vars.x = prob.block_diagonal_variable("X", n, pattern);
    // He((M X~)^T F_W) slot by slot: X~ = diag(X, ..., X)
    const Mat mtf = mscript.transpose() * f_w;
    for (Index s = 0; s < tm.layout.slot_count(); ++s) {
      const Mat es = tm.layout.slot(s);
      lmi.add_term(es.transpose(), sp.vars.x, es * mtf, true, true);
    }
    // He(([0 0 -B~ Kbar 0])^T F_W); SSF requires full state information.
    sp.vars.kbar = prob.full_variable("Kbar", sys.inputs(), n);
    lmi.add_term(-e2.transpose(), sp.vars.kbar, btilde.transpose() * f_w, true, true);
  }

  prob.add_constraint(std::move(lmi), Sense::NegDefinite, sof ? "sof_lmi" : "ssf_lmi");
  return sp;
}

}  // namespace

SynthesisProblem ssf_problem(const DelaySystem& sys, const RealJordanForm& jordan, int N, double h,
                             const Mat& f_w, double delta_scale) {
  return synthesis_base(sys, jordan, N, h, f_w, delta_scale, /*sof=*/false);
}

SynthesisProblem sof_problem(const DelaySystem& sys, const RealJordanForm& jordan, int N, double h,
                             const Mat& f_w, double delta_scale) {
  return synthesis_base(sys, jordan, N, h, f_w, delta_scale, /*sof=*/true);
}

namespace {

struct RoundOutcome {
  bool ok = false;
  Mat gain;
  Assignment certificate;
  double x_conditioning = 1.0;
  IterationRecord record;
};

struct EngineContext {
  const DelaySystem* sys = nullptr;
  const SynthesisOptions* opts = nullptr;
  GainMode mode = GainMode::StateFeedback;
  RealJordanForm jordan;
};

SlackStructure frozen_row(const EngineContext& ctx, const Mat& k_prev, Index slots,
                          double* distance) {
  const DelaySystem& sys = *ctx.sys;
  const SynthesisOptions& opts = *ctx.opts;
  SlackStructure slack;
  slack.base = Mat::Identity(sys.n(), sys.n());
  switch (opts.policy) {
    case SlackPolicy::JordanStructured: {
      slack.mode = SlackMode::Structured;
      slack.table = synthesis_epsilons(ctx.jordan, sys.a, sys.b, k_prev, sys.c, slots, sys.a1);
      slack.f_row = build_f_w(slack.table, ctx.jordan);
      break;
    }
    case SlackPolicy::UnstructuredOptimized: {
      slack.mode = SlackMode::Unstructured;
      const Index n = sys.n();
      std::vector<Mat> blocks(static_cast<std::size_t>(slots), Mat::Zero(n, n));
      blocks[0] = Mat::Identity(n, n);
      blocks[1] = -sys.a;
      blocks[2] = -sys.delayed_matrix(k_prev);
      const auto eps = epsilon_unstructured(blocks, slack.base);
      slack.table.values = Eigen::Map<const Vec>(eps.data(), static_cast<Index>(eps.size()));
      slack.f_row = build_f_eps(eps, slack.base);
      break;
    }
    case SlackPolicy::FixedPreset: {
      slack.mode = SlackMode::Unstructured;
      std::vector<double> eps(static_cast<std::size_t>(slots), 0.0);
      for (std::size_t i = 0; i < opts.preset.size() && i < eps.size(); ++i) eps[i] = opts.preset[i];
      slack.table.values = Eigen::Map<const Vec>(eps.data(), static_cast<Index>(eps.size()));
      slack.f_row = build_f_eps(eps, slack.base);
      break;
    }
  }
  if (distance)
    *distance = slack_distance(ctx.jordan, sys.a, sys.b, k_prev, sys.c, slots, slack.f_row, sys.a1);
  return slack;
}

// One freeze/solve round; ok = solver feasible and the gain recovered.
RoundOutcome run_round(const EngineContext& ctx, int N, double h, const Mat& k_prev, int round) {
  const DelaySystem& sys = *ctx.sys;
  const SynthesisOptions& opts = *ctx.opts;
  const Index slots = static_cast<Index>(N) + 3;

  RoundOutcome out;
  out.record.round = round;
  out.record.h = h;

  const SlackStructure slack = frozen_row(ctx, k_prev, slots, &out.record.fw_distance);
  out.record.epsilons = slack.table.values;
  const Mat& f_row = slack.f_row;
  SynthesisProblem sp = ctx.mode == GainMode::OutputFeedback
                            ? sof_problem(sys, ctx.jordan, N, h, f_row, opts.delta_scale)
                            : ssf_problem(sys, ctx.jordan, N, h, f_row, opts.delta_scale);
  const SolverResult res = solve(sp.problem, opts.solver);
  out.record.status = res.status;
  out.record.margin = res.margin;
  out.record.solver_iterations = res.iterations;
  if (res.status != SolveStatus::Feasible) return out;

  const Mat kbar = res.assignment.at("Kbar");
  if (ctx.mode == GainMode::OutputFeedback) {
    const double sigma = res.assignment.at("sigma")(0, 0);
    if (sigma == 0.0 || !std::isfinite(1.0 / sigma)) return out;
    out.gain = kbar / sigma;
    out.x_conditioning = std::abs(1.0 / sigma);
  } else {
    const Mat x = res.assignment.at("X");
    Eigen::FullPivLU<Mat> lu(x);
    if (!lu.isInvertible()) return out;
    out.gain = kbar * lu.inverse() * ctx.jordan.transform_inv;
    const Eigen::JacobiSVD<Mat> svd(x);
    out.x_conditioning = svd.singularValues().maxCoeff() / svd.singularValues().minCoeff();
  }
  if (!all_finite(out.gain)) return out;

  // The slack multiplier must satisfy He(X E_1) < 0 (non-singularity
  // witness of the synthesis condition); reject degenerate recoveries.
  const Mat e1block = f_row.leftCols(sys.n());
  if (ctx.mode == GainMode::OutputFeedback) {
    const double sigma = res.assignment.at("sigma")(0, 0);
    if (sym_eig_max(he(sigma * e1block)) >= 0.0) return out;
  } else {
    const Mat x = res.assignment.at("X");
    if (sym_eig_max(he(x.transpose() * e1block)) >= 0.0) return out;
  }

  out.certificate = res.assignment;
  if (ctx.mode == GainMode::StateFeedback)
    out.certificate["W"] = Mat(res.assignment.at("X").inverse());  // inverse slack blocks
  out.ok = true;
  return out;
}

struct IterateOutcome {
  bool ok = false;
  Mat gain;
  Assignment certificate;
  double x_conditioning = 1.0;
  std::vector<IterationRecord> records;
};

IterateOutcome try_iterate(const EngineContext& ctx, int N, double h, const Mat& k0) {
  const SynthesisOptions& opts = *ctx.opts;
  // With a frozen preset the LMI does not depend on the previous gain, so a
  // single round suffices.
  const int rounds = opts.policy == SlackPolicy::FixedPreset ? 1 : std::max(1, opts.l_max);

  IterateOutcome out;
  Mat k = k0;
  for (int l = 1; l <= rounds; ++l) {
    RoundOutcome r = run_round(ctx, N, h, k, l);
    out.records.push_back(r.record);
    if (!r.ok) break;
    k = r.gain;
    out.gain = r.gain;
    out.certificate = std::move(r.certificate);
    out.x_conditioning = r.x_conditioning;
    out.ok = true;
  }
  return out;
}

// Oracle gate: the closed loop at (A_d, h) must have negative abscissa.
bool oracle_stable(const EngineContext& ctx, const Mat& gain, double h, double* abscissa) {
  const SpectralEstimate est =
      spectral_abscissa(ctx.sys->a, ctx.sys->delayed_matrix(gain), h, ctx.opts->spectral);
  if (abscissa) *abscissa = est.abscissa;
  return est.abscissa < 0.0;
}

double offdiag_mass(const EngineContext& ctx, const Mat& gain) {
  const Mat td = ctx.jordan.transform_inv * ctx.sys->delayed_matrix(gain) * ctx.jordan.transform;
  Mat mask = td;
  for (const auto& g : ctx.jordan.groups)
    mask.block(g.start, g.start, g.size, g.size).setZero();
  const double total = td.norm();
  return total > 0.0 ? mask.norm() / total : 0.0;
}

SynthesisResult finalize(const EngineContext& ctx, const IterateOutcome& it, double h,
                         std::vector<IterationRecord> trace) {
  SynthesisResult res;
  res.gain = it.gain;
  res.certificate = it.certificate;
  res.h_achieved = h;
  res.trace = std::move(trace);
  res.mode = ctx.mode;
  res.transform_conditioning = ctx.jordan.conditioning;
  res.x_conditioning = it.x_conditioning;
  res.gain_structure_offdiag = offdiag_mass(ctx, it.gain);

  double absc = 0.0;
  if (!oracle_stable(ctx, it.gain, h, &absc))
    throw Error(Errc::SolverFailure,
                "certified gain failed the spectral oracle at h = " + std::to_string(h));
  res.spectral_abscissa = absc;
  return res;
}

EngineContext make_context(const DelaySystem& sys, const SynthesisOptions& opts, GainMode mode) {
  sys.validate();
  if (mode == GainMode::StateFeedback && !sys.c.isIdentity(0.0))
    throw Error(Errc::DimensionMismatch, "state feedback requires C = I");
  EngineContext ctx;
  ctx.sys = &sys;
  ctx.opts = &opts;
  ctx.mode = mode;
  if (opts.policy == SlackPolicy::JordanStructured) {
    try {
      ctx.jordan = real_jordan_form(sys.a, opts.jordan);
    } catch (const Error& e) {
      if (e.code() != Errc::FailsDecomposition) throw;
      ctx.jordan = RealJordanForm::identity(sys.a);  // documented fallback
    }
  } else {
    ctx.jordan = RealJordanForm::identity(sys.a);
  }
  return ctx;
}

Mat starting_gain(const EngineContext& ctx) {
  const DelaySystem& sys = *ctx.sys;
  const SynthesisOptions& opts = *ctx.opts;
  if (opts.initial_gain) {
    if (opts.initial_gain->rows() != sys.inputs() || opts.initial_gain->cols() != sys.outputs())
      throw Error(Errc::DimensionMismatch, "initial gain shape does not match plant");
    return *opts.initial_gain;
  }
  // The delay-free closed loop of the variant includes the delayed-state
  // matrix, so stabilize A + A1 rather than A alone.
  const Mat a_free = sys.a1 ? Mat(sys.a + *sys.a1) : sys.a;
  if (ctx.mode == GainMode::StateFeedback) return initial_gain(a_free, sys.b, opts.solver);

  // Randomized output-feedback initialization: keep the first delay-free
  // stabilizing candidate per restart budget.
  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const double scale = std::max(1.0, sys.a.norm()) / std::max(1.0, sys.b.norm() * sys.c.norm());
  for (int attempt = 0; attempt < std::max(1, ctx.opts->restarts) * 64; ++attempt) {
    Mat k(sys.inputs(), sys.outputs());
    for (Index i = 0; i < k.rows(); ++i)
      for (Index j = 0; j < k.cols(); ++j) k(i, j) = scale * dist(rng);
    const Mat a_free = sys.a + sys.delayed_matrix(k);
    if (matrix_abscissa(a_free) < 0.0) return k;
  }
  throw Error(Errc::NotStabilizable, "no delay-free stabilizing output gain found");
}

SynthesisResult path_follow_from(const EngineContext& ctx, const Mat& k0) {
  const SynthesisOptions& opts = *ctx.opts;
  if (!(opts.h0 > 0.0) || !(opts.dh0 > 0.0) || !(opts.dh_min > 0.0))
    throw Error(Errc::DimensionMismatch, "path_follow: h0, dh0, dh_min must be positive");

  std::vector<IterationRecord> trace;
  const int N = opts.order;

  IterateOutcome cur = try_iterate(ctx, N, opts.h0, k0);
  trace.insert(trace.end(), cur.records.begin(), cur.records.end());
  if (!cur.ok || !oracle_stable(ctx, cur.gain, opts.h0, nullptr))
    throw Error(Errc::NoProgress, "synthesis failed at the initial delay h0 = " +
                                      std::to_string(opts.h0));

  double h = opts.h0;
  double dh = opts.dh0;
  while (dh >= opts.dh_min && h < opts.h_cap) {
    const double cand = std::min(h + dh, opts.h_cap);
    IterateOutcome nxt = try_iterate(ctx, N, cand, cur.gain);
    trace.insert(trace.end(), nxt.records.begin(), nxt.records.end());
    if (nxt.ok && oracle_stable(ctx, nxt.gain, cand, nullptr)) {
      h = cand;
      cur = std::move(nxt);
    } else {
      dh *= 0.5;
    }
  }
  return finalize(ctx, cur, h, std::move(trace));
}

}  // namespace

SynthesisResult iterate(const DelaySystem& sys, int N, double h, const Mat& k0,
                        const SynthesisOptions& opts, GainMode mode) {
  SynthesisOptions local = opts;
  local.order = N;
  EngineContext ctx = make_context(sys, local, mode);
  const IterateOutcome out = try_iterate(ctx, N, h, k0);
  if (!out.ok)
    throw Error(Errc::InfeasibleAtDelay, "no freeze/solve round feasible at h = " + std::to_string(h));
  return finalize(ctx, out, h, out.records);
}

SynthesisResult path_follow(const DelaySystem& sys, const SynthesisOptions& opts, GainMode mode) {
  EngineContext ctx = make_context(sys, opts, mode);

  if (!opts.initial_gain && mode == GainMode::OutputFeedback && opts.restarts > 1) {
    // Several seeded restarts; keep the best achieved delay.
    std::optional<SynthesisResult> best;
    std::mt19937 seeder(opts.seed);
    for (int r = 0; r < opts.restarts; ++r) {
      SynthesisOptions trial = opts;
      trial.seed = seeder();
      trial.restarts = 1;
      EngineContext tctx = make_context(sys, trial, mode);
      try {
        const Mat k = starting_gain(tctx);
        SynthesisResult res = path_follow_from(tctx, k);
        if (!best || res.h_achieved > best->h_achieved) best = std::move(res);
      } catch (const Error&) {
        // restart failed; try the next seed
      }
    }
    if (!best) throw Error(Errc::NoProgress, "all output-feedback restarts failed");
    return *best;
  }

  return path_follow_from(ctx, starting_gain(ctx));
}

SynthesisResult fixed_epsilon_synthesis(const DelaySystem& sys, int N, EpsilonPreset preset,
                                        SynthesisOptions opts) {
  opts.order = N;
  opts.policy = SlackPolicy::FixedPreset;
  opts.preset = preset == EpsilonPreset::One ? std::vector<double>{1.0, 1.0, 1.0}
                                             : std::vector<double>{1.0, 0.5, 1.0};
  return path_follow(sys, opts, GainMode::StateFeedback);
}

}  // namespace tdsyn
