#pragma once

#include "tdsyn/config.hpp"
#include "tdsyn/synthesis.hpp"

#include <string>
#include <vector>

namespace tdsyn {

/// One result row of a pipeline run; NaN marks columns a mode does not fill.
struct ReportRow {
  std::string kind;   // ssf | sof | full | fixed-eps:eps1 | analyze | fixture
  int order = 0;      // N
  double h_max = std::numeric_limits<double>::quiet_NaN();       // achieved by synthesis
  double h_thm1 = std::numeric_limits<double>::quiet_NaN();      // certified delay margin of the gain
  double h_spectral = std::numeric_limits<double>::quiet_NaN();  // oracle delay margin of the gain
  Mat gain;
  int rounds = 0;
  double avg_solver_iterations = 0.0;
  std::string statuses;           // per-round solver status letters (F/I/N/X)
  std::vector<double> fw_trace;   // ||M~ - F_W||_F per round
  double oracle_abscissa = std::numeric_limits<double>::quiet_NaN();
  bool oracle_ok = false;
  double gain_structure_offdiag = std::numeric_limits<double>::quiet_NaN();
  double slack_conditioning = std::numeric_limits<double>::quiet_NaN();  // cond(X) or |1/sigma|
  std::string note;   // soft diagnostics (hierarchy flags and similar)
  std::string error;  // non-empty when the pipeline errored for this row
};

struct RunReport {
  std::string title;
  unsigned seed = 0;
  std::vector<ReportRow> rows;

  bool any_error() const;
};

/// Runs the configured pipeline (fan-out over the order list bounded by
/// cfg.jobs; rows are reported in deterministic order).
RunReport run(const ProblemConfig& cfg);

/// Writes report.csv, report.json and table.txt under `dir`.
void write_report(const RunReport& report, const std::string& dir);

enum class Verdict { CertifiedAtH, SpectralStableAtH, Neither };

/// Certified (order-N analysis feasible) and/or oracle verdict of a given
/// gain at the config delay h.
Verdict validate_gain(const ProblemConfig& cfg, const Mat& gain, int order, double h);

const char* verdict_name(Verdict v);

struct ReproduceSections {
  bool table1 = true;    // structured SSF rows for the first bundled plant
  bool fixtures = true;  // analysis columns of the reference gains
  bool presets = true;   // fixed-epsilon rows
  bool fig1 = true;      // full vs structured vs output-feedback comparison
  bool example2 = true;  // single-input plant row
  bool table2 = true;    // iteration-economy table (needs table1)
};

/// Runs the bundled benchmark problems and writes table1.csv, fig1.csv,
/// table2.csv, example2.txt plus the combined report files under out_dir.
RunReport reproduce(const std::string& out_dir, const ReproduceSections& sections = {},
                    int jobs = 1, unsigned seed = 0, double solver_tol = 1e-9);

}  // namespace tdsyn
