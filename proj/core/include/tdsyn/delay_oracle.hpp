#pragma once

#include "tdsyn/matrix.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace tdsyn {

/// Fixed-step trajectory of xdot = A x(t) + A_d x(t-h) including the sampled
/// initial function on [-h, 0].
struct DelayTrajectory {
  double dt = 0.0;
  double h = 0.0;
  std::vector<double> times;
  std::vector<Vec> states;
  bool diverged = false;

  const Vec& final_state() const { return states.back(); }
};

/// Classical 4th-order explicit integration with cubic interpolation of the
/// stored history for the delayed argument (method-of-steps consistent: the
/// interpolation never looks ahead of computed samples). Requires dt <= h/10.
DelayTrajectory simulate(const Mat& a, const Mat& a_d, double h,
                         const std::function<Vec(double)>& phi, double t_end, double dt);

/// Convenience overload with a constant initial function.
DelayTrajectory simulate(const Mat& a, const Mat& a_d, double h, const Vec& x0, double t_end,
                         double dt);

struct SpectralOptions {
  int order = 30;           // Chebyshev collocation order
  int max_order = 480;
  double agreement_tol = 1e-6;  // required |abscissa(M) - abscissa(1.5M)|
  double newton_tol = 1e-12;
  int newton_max_iter = 60;
};

struct SpectralEstimate {
  double abscissa = 0.0;
  int order_used = 0;
  std::vector<std::complex<double>> rightmost;
  bool newton_converged = true;
};

/// Rightmost characteristic roots of det(sI - A - A_d e^{-sh}) = 0 via
/// pseudospectral collocation of the solution-operator generator on Chebyshev
/// points, refined by Newton steps on the characteristic function. The
/// collocation order is doubled until two successive estimates agree.
SpectralEstimate spectral_abscissa(const Mat& a, const Mat& a_d, double h,
                                   const SpectralOptions& opts = {});

struct SpectralDelayResult {
  double h_max = 0.0;
  bool capped = false;  // stable for every delay probed up to h_cap
  int evaluations = 0;
};

/// Bisection of the abscissa sign over h. Throws Errc::UnstableAtZero when
/// the h -> 0 limit (eigenvalues of A + A_d) is already unstable; returns
/// capped = true when no instability is found below h_cap.
SpectralDelayResult spectral_max_delay(const Mat& a, const Mat& a_d, double tol = 1e-3,
                                       double h_cap = 100.0, const SpectralOptions& opts = {});

}  // namespace tdsyn
