#pragma once

#include "tdsyn/matrix.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tdsyn {

enum class RunMode { Analyze, Ssf, Sof, FixedEps };
enum class SlackChoice { Jordan, Full };

/// One problem definition parsed from a key/value config file with nested
/// numeric arrays. All knobs default to the documented algorithm defaults.
struct ProblemConfig {
  RunMode mode = RunMode::Ssf;
  Mat a, b, c;                // C defaults to identity when omitted
  std::optional<Mat> a_d;     // analyze mode: delayed matrix directly
  std::optional<Mat> a1;      // delayed-state-matrix variant
  std::vector<int> orders{1};
  std::optional<double> h;    // single-delay modes (analyze at fixed h, validate, export)
  std::optional<Mat> k0;
  std::string preset = "eps1";
  SlackChoice slack = SlackChoice::Jordan;

  int l_max = 3;
  double h0 = 0.1;
  double dh0 = 0.1;
  double dh_min = 1e-3;
  double h_cap = 100.0;
  double delta_scale = 1e-7;
  double solver_tol = 1e-9;
  double bisect_tol = 1e-3;
  int restarts = 10;
  unsigned seed = 0;
  int jobs = 1;

  std::string source_path;
};

/// Parses the config text. Diagnostics carry line numbers and field names
/// (Errc::ConfigInvalid).
ProblemConfig parse_config(const std::string& text, const std::string& path = "<memory>");
ProblemConfig load_config(const std::string& path);

/// Whitespace matrix text: one row per line.
Mat load_matrix_file(const std::string& path);

/// Lossless round-trip of the parsed config (documented defaults included).
std::string dump_config(const ProblemConfig& cfg);

}  // namespace tdsyn
