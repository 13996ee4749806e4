#pragma once

#include "tdsyn/bessel_legendre.hpp"
#include "tdsyn/delay_oracle.hpp"
#include "tdsyn/jordan.hpp"
#include "tdsyn/slack.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tdsyn {

/// Plant xdot = A x + B u(t-h), y = C x, optionally with an extra delayed
/// state matrix A1 (xdot = A x + A1 x(t-h) + B u(t-h)).
struct DelaySystem {
  Mat a;
  Mat b;
  Mat c;
  std::optional<Mat> a1;

  Index n() const { return a.rows(); }
  Index inputs() const { return b.cols(); }
  Index outputs() const { return c.rows(); }

  void validate() const;

  /// Delayed closed-loop matrix A_d = A1 + B K C.
  Mat delayed_matrix(const Mat& k) const;

  static DelaySystem state_feedback(Mat a, Mat b);
};

enum class GainMode { StateFeedback, OutputFeedback };
enum class SlackPolicy { JordanStructured, UnstructuredOptimized, FixedPreset };

struct SynthesisOptions {
  int order = 1;  // N
  int l_max = 3;
  double h0 = 0.1;
  double dh0 = 0.1;
  double dh_min = 1e-3;
  double h_cap = 100.0;
  SlackPolicy policy = SlackPolicy::JordanStructured;
  std::vector<double> preset;  // fixed epsilon values for FixedPreset
  std::optional<Mat> initial_gain;
  int restarts = 10;       // random output-feedback initializations
  unsigned seed = 0;
  double delta_scale = 1e-7;
  JordanOptions jordan;
  SolverOptions solver;
  SpectralOptions spectral;
};

struct IterationRecord {
  int round = 0;
  double h = 0.0;
  SolveStatus status = SolveStatus::Failed;
  double margin = 0.0;
  Mat epsilons;              // frozen multiplier table of this round
  double fw_distance = 0.0;  // ||M~ - F_W||_F after the freeze
  int solver_iterations = 0;
};

struct SynthesisResult {
  Mat gain;
  Assignment certificate;
  double h_achieved = 0.0;
  std::vector<IterationRecord> trace;
  GainMode mode = GainMode::StateFeedback;
  double spectral_abscissa = 0.0;      // oracle value at h_achieved
  double transform_conditioning = 1.0;
  double gain_structure_offdiag = 0.0; // off-pattern mass of T^-1 (BKC) T
  double x_conditioning = 1.0;         // cond of the recovered X (or |sigma|)
};

/// Delay-free stabilizing gain from He(AQ + BZ) < 0, Q > 0, K0 = Z Q^-1.
/// Returns zero when A is already Hurwitz. Throws Errc::NotStabilizable.
Mat initial_gain(const Mat& a, const Mat& b, const SolverOptions& options = {});

struct SynthesisVars {
  PhiVars phi;
  VarId kbar = 0;
  VarId x = 0;      // SSF slack inverse, block-diagonal
  std::optional<VarId> sigma;  // SOF scalar slack
};

struct SynthesisProblem {
  SdpProblem problem;
  SynthesisVars vars;
};

/// SSF feasibility problem at a frozen multiplier row F_W:
/// Phi_N + He((M X~ + [0 0 -B~ Kbar 0])^T F_W) < 0, gain K = Kbar X^-1 T^-1.
SynthesisProblem ssf_problem(const DelaySystem& sys, const RealJordanForm& jordan, int N, double h,
                             const Mat& f_w, double delta_scale = 1e-7);

/// SOF variant with scalar slack sigma, gain K = Kbar / sigma.
SynthesisProblem sof_problem(const DelaySystem& sys, const RealJordanForm& jordan, int N, double h,
                             const Mat& f_w, double delta_scale = 1e-7);

/// Runs the freeze/solve rounds at fixed h from the gain k0. Throws
/// Errc::InfeasibleAtDelay when no round is feasible.
SynthesisResult iterate(const DelaySystem& sys, int N, double h, const Mat& k0,
                        const SynthesisOptions& opts, GainMode mode = GainMode::StateFeedback);

/// Delay ramp: repeats iterate() while growing h by dh, halving dh on
/// failure, until dh < dh_min or h_cap. Every accepted step re-verifies the
/// certificate and the oracle abscissa. Throws Errc::NoProgress when even h0
/// fails.
SynthesisResult path_follow(const DelaySystem& sys, const SynthesisOptions& opts,
                            GainMode mode = GainMode::StateFeedback);

enum class EpsilonPreset { One, Two };  // eps1 = (1,1,1), eps2 = (1,0.5,1)

/// path_follow with the frozen unstructured preset row (no per-step
/// re-optimization of the multipliers).
SynthesisResult fixed_epsilon_synthesis(const DelaySystem& sys, int N, EpsilonPreset preset,
                                        SynthesisOptions opts);

}  // namespace tdsyn
