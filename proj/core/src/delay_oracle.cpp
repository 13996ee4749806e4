#include "tdsyn/delay_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace tdsyn {

namespace {

constexpr double kDivergenceGuard = 1e12;

// Cubic Lagrange interpolation of the history at grid offset `pos` (in steps,
// fractional). Stencil is clamped at the left end of the stored history.
Vec interp_history(const std::vector<Vec>& hist, double pos) {
  const auto nmax = static_cast<std::ptrdiff_t>(hist.size()) - 1;
  const auto base = static_cast<std::ptrdiff_t>(std::floor(pos));
  const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(base - 1, 0, nmax - 3);
  const double u = pos - static_cast<double>(lo);
  Vec out = Vec::Zero(hist.front().size());
  for (int k = 0; k < 4; ++k) {
    double w = 1.0;
    for (int l = 0; l < 4; ++l)
      if (l != k) w *= (u - l) / static_cast<double>(k - l);
    out += w * hist[static_cast<std::size_t>(lo + k)];
  }
  return out;
}

}  // namespace

DelayTrajectory simulate(const Mat& a, const Mat& a_d, double h,
                         const std::function<Vec(double)>& phi, double t_end, double dt) {
  if (a.rows() != a.cols() || a_d.rows() != a.rows() || a_d.cols() != a.cols())
    throw Error(Errc::DimensionMismatch, "simulate: matrix dimensions");
  if (!(h > 0.0) || !(dt > 0.0) || !(t_end > 0.0))
    throw Error(Errc::DimensionMismatch, "simulate: h, dt, t_end must be positive");
  if (dt > h / 10.0) throw Error(Errc::DimensionMismatch, "simulate: dt must be <= h/10");

  const auto n_h = static_cast<std::size_t>(std::ceil(h / dt - 1e-12));
  const double step = h / static_cast<double>(n_h);
  const auto n_fwd = static_cast<std::size_t>(std::ceil(t_end / step - 1e-12));

  DelayTrajectory traj;
  traj.dt = step;
  traj.h = h;
  traj.states.reserve(n_h + n_fwd + 1);
  traj.times.reserve(n_h + n_fwd + 1);

  for (std::size_t i = 0; i <= n_h; ++i) {
    const double t = -h + static_cast<double>(i) * step;
    traj.times.push_back(t);
    traj.states.push_back(phi(std::min(t, 0.0)));
  }

  auto deriv = [&](double t_steps, const Vec& x) {
    // t_steps: absolute grid position of the evaluation time (0 == t = -h).
    return Vec(a * x + a_d * interp_history(traj.states, t_steps - static_cast<double>(n_h)));
  };

  for (std::size_t k = 0; k < n_fwd; ++k) {
    const double tk = static_cast<double>(n_h + k);
    const Vec& x = traj.states.back();
    const Vec k1 = deriv(tk, x);
    const Vec k2 = deriv(tk + 0.5, x + 0.5 * step * k1);
    const Vec k3 = deriv(tk + 0.5, x + 0.5 * step * k2);
    const Vec k4 = deriv(tk + 1.0, x + step * k3);
    Vec next = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    traj.times.push_back(-h + (tk + 1.0) * step);
    traj.states.push_back(next);
    if (!next.allFinite() || next.norm() > kDivergenceGuard) {
      traj.diverged = true;
      break;
    }
  }
  return traj;
}

DelayTrajectory simulate(const Mat& a, const Mat& a_d, double h, const Vec& x0, double t_end,
                         double dt) {
  return simulate(a, a_d, h, [&](double) { return x0; }, t_end, dt);
}

namespace {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Eigenvalues of the collocated generator at order M.
std::vector<Complex> collocation_roots(const Mat& a, const Mat& a_d, double h, int M) {
  const Index n = a.rows();
  const Index dim = static_cast<Index>(M + 1) * n;

  // Chebyshev extreme points on [-1, 1] and differentiation matrix.
  Vec xs(M + 1);
  for (int j = 0; j <= M; ++j) xs[j] = std::cos(M_PI * j / M);
  Mat d = Mat::Zero(M + 1, M + 1);
  auto cw = [&](int j) { return (j == 0 || j == M) ? 2.0 : 1.0; };
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j <= M; ++j)
      if (i != j) d(i, j) = (cw(i) / cw(j)) * ((i + j) % 2 == 0 ? 1.0 : -1.0) / (xs[i] - xs[j]);
  for (int i = 0; i <= M; ++i) d(i, i) = -d.row(i).sum() + d(i, i);

  // theta = (x - 1) h/2 maps to [-h, 0] with theta_0 = 0, theta_M = -h.
  d *= 2.0 / h;

  Mat gen = Mat::Zero(dim, dim);
  for (int i = 1; i <= M; ++i)
    for (int j = 0; j <= M; ++j)
      gen.block(i * n, j * n, n, n) = d(i, j) * Mat::Identity(n, n);
  gen.block(0, 0, n, n) = a;
  gen.block(0, M * n, n, n) += a_d;

  Eigen::EigenSolver<Mat> es(gen, /*computeEigenvectors=*/false);
  std::vector<Complex> roots(es.eigenvalues().data(), es.eigenvalues().data() + dim);
  return roots;
}

struct NewtonResult {
  Complex root;
  bool converged = false;
};

NewtonResult newton_refine(const Mat& a, const Mat& a_d, double h, Complex s0,
                           const SpectralOptions& opts) {
  const Index n = a.rows();
  const CMat ac = a.cast<Complex>(), adc = a_d.cast<Complex>();
  Complex s = s0;
  for (int it = 0; it < opts.newton_max_iter; ++it) {
    const Complex decay = std::exp(-s * h);
    CMat delta = s * CMat::Identity(n, n) - ac - decay * adc;
    CMat dprime = CMat::Identity(n, n) + h * decay * adc;
    Eigen::PartialPivLU<CMat> lu(delta);
    const CMat sol = lu.solve(dprime);
    const Complex trace = sol.trace();
    if (!std::isfinite(trace.real()) || !std::isfinite(trace.imag()) || std::abs(trace) < 1e-300)
      return {s, false};
    const Complex step = 1.0 / trace;  // det'/det = tr(Delta^-1 Delta')
    s -= step;
    if (std::abs(step) <= opts.newton_tol * std::max(1.0, std::abs(s))) return {s, true};
    if (std::abs(s) > 1e8) return {s0, false};
  }
  return {s, false};
}

struct AbscissaPass {
  double abscissa;
  std::vector<Complex> rightmost;
  bool newton_ok;
};

AbscissaPass abscissa_at_order(const Mat& a, const Mat& a_d, double h, int M,
                               const SpectralOptions& opts) {
  auto roots = collocation_roots(a, a_d, h, M);
  std::sort(roots.begin(), roots.end(),
            [](const Complex& x, const Complex& y) { return x.real() > y.real(); });

  AbscissaPass pass{-std::numeric_limits<double>::infinity(), {}, true};
  const std::size_t candidates = std::min<std::size_t>(roots.size(), 10);
  for (std::size_t i = 0; i < candidates; ++i) {
    const NewtonResult nr = newton_refine(a, a_d, h, roots[i], opts);
    Complex val = nr.converged ? nr.root : roots[i];
    if (!nr.converged) pass.newton_ok = false;
    bool dup = false;
    for (const Complex& r : pass.rightmost)
      if (std::abs(r - val) < 1e-7 * std::max(1.0, std::abs(val))) dup = true;
    if (!dup) pass.rightmost.push_back(val);
    pass.abscissa = std::max(pass.abscissa, val.real());
  }
  std::sort(pass.rightmost.begin(), pass.rightmost.end(),
            [](const Complex& x, const Complex& y) { return x.real() > y.real(); });
  return pass;
}

}  // namespace

SpectralEstimate spectral_abscissa(const Mat& a, const Mat& a_d, double h,
                                   const SpectralOptions& opts) {
  if (a.rows() != a.cols() || a_d.rows() != a.rows() || a_d.cols() != a.cols())
    throw Error(Errc::DimensionMismatch, "spectral_abscissa: matrix dimensions");
  if (!(h > 0.0)) throw Error(Errc::DimensionMismatch, "spectral_abscissa: h > 0 required");
  if (opts.order < 10) throw Error(Errc::DimensionMismatch, "spectral_abscissa: order >= 10");

  SpectralEstimate est;
  if (a_d.norm() == 0.0) {  // delay-free: characteristic roots are eig(A)
    Eigen::EigenSolver<Mat> es(a, false);
    est.abscissa = es.eigenvalues().real().maxCoeff();
    est.order_used = 0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) est.rightmost.push_back(es.eigenvalues()[i]);
    return est;
  }

  int M = opts.order;
  AbscissaPass base = abscissa_at_order(a, a_d, h, M, opts);
  while (true) {
    const int m_check = static_cast<int>(std::ceil(1.5 * M));
    const AbscissaPass check = abscissa_at_order(a, a_d, h, m_check, opts);
    if (std::abs(check.abscissa - base.abscissa) <= opts.agreement_tol) {
      est.abscissa = check.abscissa;
      est.order_used = m_check;
      est.rightmost = check.rightmost;
      est.newton_converged = base.newton_ok && check.newton_ok;
      return est;
    }
    M *= 2;
    if (M > opts.max_order)
      throw Error(Errc::NoConvergence,
                  "spectral_abscissa: no agreement up to collocation order " + std::to_string(M));
    base = abscissa_at_order(a, a_d, h, M, opts);
  }
}

SpectralDelayResult spectral_max_delay(const Mat& a, const Mat& a_d, double tol, double h_cap,
                                       const SpectralOptions& opts) {
  if (!(tol > 0.0)) throw Error(Errc::DimensionMismatch, "spectral_max_delay: tol > 0 required");
  SpectralDelayResult res;

  if (matrix_abscissa(a + a_d) >= 0.0)
    throw Error(Errc::UnstableAtZero, "spectral_max_delay: unstable in the h -> 0 limit");

  auto unstable_at = [&](double h) {
    ++res.evaluations;
    return spectral_abscissa(a, a_d, h, opts).abscissa >= 0.0;
  };

  double lo = 0.0;
  double hi = std::max(tol, 1e-2);
  while (!unstable_at(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi >= h_cap) {
      if (!unstable_at(h_cap)) {
        res.h_max = h_cap;
        res.capped = true;
        return res;
      }
      hi = h_cap;
      break;
    }
  }

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (unstable_at(mid))
      hi = mid;
    else
      lo = mid;
  }
  res.h_max = lo;
  return res;
}

}  // namespace tdsyn
