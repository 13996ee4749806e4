#pragma once

#include "tdsyn/lmi.hpp"

namespace tdsyn {

enum class SolveStatus { Feasible, Infeasible, Inaccurate, Failed };

const char* status_name(SolveStatus s);

struct SolverOptions {
  double gap_tol = 1e-9;        // relative duality gap target
  double feas_tol = 1e-8;       // primal/dual residual target
  double verify_tol = 1e-7;     // absolute eigenvalue tolerance for post-hoc verification
  int max_iterations = 100;
  double box_radius = 1e4;      // bound on every scalar unknown
  double margin_cap = 1.0;      // cap on the extra-margin objective
  double step_fraction = 0.98;  // fraction of the step to the cone boundary
  bool normalize_homogeneous = true;
  bool verbose = false;
};

struct SolverResult {
  SolveStatus status = SolveStatus::Failed;
  Assignment assignment;
  double margin = 0.0;         // achieved extra margin beyond the per-constraint deltas
  double max_violation = 0.0;  // post-hoc eigenvalue excess at the assignment
  int iterations = 0;
  bool box_active = false;     // an unknown finished near the box bound
};

/// Feasibility solve via the max-extra-margin reformulation and a
/// primal-dual predictor-corrector interior point method. Deterministic for
/// identical inputs and options.
SolverResult solve(const SdpProblem& problem, const SolverOptions& options = {});

}  // namespace tdsyn
