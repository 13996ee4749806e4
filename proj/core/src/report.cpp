#include "tdsyn/report.hpp"

#include "tdsyn/fixtures.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace tdsyn {

namespace {

using json = nlohmann::json;

char status_letter(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return 'F';
    case SolveStatus::Infeasible: return 'I';
    case SolveStatus::Inaccurate: return 'N';
    case SolveStatus::Failed: return 'X';
  }
  return '?';
}

SynthesisOptions options_from(const ProblemConfig& cfg, int order) {
  SynthesisOptions opts;
  opts.order = order;
  opts.l_max = cfg.l_max;
  opts.h0 = cfg.h0;
  opts.dh0 = cfg.dh0;
  opts.dh_min = cfg.dh_min;
  opts.h_cap = cfg.h_cap;
  opts.policy = cfg.slack == SlackChoice::Jordan ? SlackPolicy::JordanStructured
                                                 : SlackPolicy::UnstructuredOptimized;
  opts.initial_gain = cfg.k0;
  opts.restarts = cfg.restarts;
  opts.seed = cfg.seed;
  opts.delta_scale = cfg.delta_scale;
  opts.solver.gap_tol = cfg.solver_tol;
  opts.solver.feas_tol = cfg.solver_tol;
  return opts;
}

void fill_from_result(ReportRow& row, const SynthesisResult& res) {
  row.h_max = res.h_achieved;
  row.gain = res.gain;
  row.rounds = static_cast<int>(res.trace.size());
  double iters = 0.0;
  for (const auto& r : res.trace) {
    iters += r.solver_iterations;
    row.statuses.push_back(status_letter(r.status));
    row.fw_trace.push_back(r.fw_distance);
  }
  row.avg_solver_iterations = row.rounds ? iters / row.rounds : 0.0;
  row.oracle_abscissa = res.spectral_abscissa;
  row.oracle_ok = res.spectral_abscissa < 0.0;
  row.gain_structure_offdiag = res.gain_structure_offdiag;
  row.slack_conditioning = res.x_conditioning;
}

// Certified and spectral delay margins of a fixed gain.
void fill_margins(ReportRow& row, const DelaySystem& sys, const Mat& gain, int order,
                  const ProblemConfig& cfg) {
  const Mat a_d = sys.delayed_matrix(gain);
  MaxDelayOptions mopts;
  mopts.tol = cfg.bisect_tol;
  mopts.h_cap = cfg.h_cap;
  mopts.delta_scale = cfg.delta_scale;
  mopts.solver.gap_tol = cfg.solver_tol;
  mopts.solver.feas_tol = cfg.solver_tol;
  row.h_thm1 = max_delay_analysis(sys.a, a_d, order, mopts).h_max;
  row.h_spectral = spectral_max_delay(sys.a, a_d, cfg.bisect_tol, cfg.h_cap).h_max;
}

ReportRow run_one(const ProblemConfig& cfg, int order) {
  ReportRow row;
  row.order = order;
  try {
    switch (cfg.mode) {
      case RunMode::Analyze: {
        row.kind = "analyze";
        MaxDelayOptions mopts;
        mopts.tol = cfg.bisect_tol;
        mopts.h_cap = cfg.h_cap;
        mopts.delta_scale = cfg.delta_scale;
        mopts.solver.gap_tol = cfg.solver_tol;
        mopts.solver.feas_tol = cfg.solver_tol;
        row.h_thm1 = max_delay_analysis(cfg.a, *cfg.a_d, order, mopts).h_max;
        break;
      }
      case RunMode::Ssf: {
        row.kind = cfg.slack == SlackChoice::Jordan ? "ssf" : "full";
        DelaySystem sys{cfg.a, cfg.b, cfg.c, cfg.a1};
        if (!cfg.c.isIdentity(0.0)) {
          // Full-rank output maps are absorbed into coordinates y = C x; the
          // synthesized gain still acts on the measured output.
          if (cfg.c.rows() != cfg.c.cols())
            throw Error(Errc::DimensionMismatch, "state feedback needs a full-rank square C");
          Eigen::FullPivLU<Mat> lu(cfg.c);
          if (!lu.isInvertible())
            throw Error(Errc::DimensionMismatch, "state feedback needs an invertible C");
          sys.a = cfg.c * cfg.a * lu.inverse();
          sys.b = cfg.c * cfg.b;
          sys.c = Mat::Identity(cfg.a.rows(), cfg.a.rows());
          if (cfg.a1) sys.a1 = cfg.c * (*cfg.a1) * lu.inverse();
        }
        const SynthesisResult res = path_follow(sys, options_from(cfg, order));
        fill_from_result(row, res);
        fill_margins(row, sys, res.gain, order, cfg);
        break;
      }
      case RunMode::Sof: {
        row.kind = "sof";
        DelaySystem sys{cfg.a, cfg.b, cfg.c, cfg.a1};
        const SynthesisResult res =
            path_follow(sys, options_from(cfg, order), GainMode::OutputFeedback);
        fill_from_result(row, res);
        break;
      }
      case RunMode::FixedEps: {
        row.kind = "fixed-eps:" + cfg.preset;
        DelaySystem sys{cfg.a, cfg.b, cfg.c, cfg.a1};
        const EpsilonPreset preset =
            cfg.preset == "eps1" ? EpsilonPreset::One : EpsilonPreset::Two;
        const SynthesisResult res = fixed_epsilon_synthesis(sys, order, preset, options_from(cfg, order));
        fill_from_result(row, res);
        break;
      }
    }
  } catch (const Error& e) {
    row.error = std::string(errc_name(e.code())) + ": " + e.what();
  }
  return row;
}

// Bounded fan-out preserving input order.
std::vector<ReportRow> pooled(const std::vector<std::function<ReportRow()>>& tasks, int jobs) {
  std::vector<ReportRow> rows(tasks.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) rows[i] = tasks[i]();
    return rows;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      rows[i] = tasks[i]();
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min<int>(jobs, static_cast<int>(tasks.size()));
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return rows;
}

std::string fmt(double v, const char* spec = "%.4f") {
  if (std::isnan(v)) return "-";
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string gain_string(const Mat& k) {
  if (k.size() == 0) return "-";
  std::ostringstream os;
  os << "[";
  for (Index i = 0; i < k.rows(); ++i) {
    os << "[";
    for (Index j = 0; j < k.cols(); ++j) {
      os << fmt(k(i, j), "%.6g");
      if (j + 1 < k.cols()) os << " ";
    }
    os << "]";
  }
  os << "]";
  return os.str();
}

json row_json(const ReportRow& r) {
  json j;
  j["kind"] = r.kind;
  j["N"] = r.order;
  if (!std::isnan(r.h_max)) j["h_max"] = r.h_max;
  if (!std::isnan(r.h_thm1)) j["h_certified"] = r.h_thm1;
  if (!std::isnan(r.h_spectral)) j["h_spectral"] = r.h_spectral;
  if (r.gain.size()) {
    json g = json::array();
    for (Index i = 0; i < r.gain.rows(); ++i) {
      json row = json::array();
      for (Index jx = 0; jx < r.gain.cols(); ++jx) row.push_back(r.gain(i, jx));
      g.push_back(row);
    }
    j["K"] = g;
  }
  j["rounds"] = r.rounds;
  j["avg_solver_iterations"] = r.avg_solver_iterations;
  j["statuses"] = r.statuses;
  j["fw_trace"] = r.fw_trace;
  if (!std::isnan(r.oracle_abscissa)) j["oracle_abscissa"] = r.oracle_abscissa;
  j["oracle_ok"] = r.oracle_ok;
  if (!std::isnan(r.gain_structure_offdiag)) j["gain_structure_offdiag"] = r.gain_structure_offdiag;
  if (!std::isnan(r.slack_conditioning)) j["slack_conditioning"] = r.slack_conditioning;
  if (!r.note.empty()) j["note"] = r.note;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

void write_csv(const RunReport& rep, const std::string& path) {
  std::ofstream f(path);
  f << "kind,N,h_max,h_certified,h_spectral,K,rounds,avg_solver_iterations,statuses,oracle_ok,error\n";
  for (const auto& r : rep.rows) {
    f << r.kind << ',' << r.order << ',' << fmt(r.h_max, "%.6g") << ',' << fmt(r.h_thm1, "%.6g")
      << ',' << fmt(r.h_spectral, "%.6g") << ',' << '"' << gain_string(r.gain) << '"' << ','
      << r.rounds << ',' << fmt(r.avg_solver_iterations, "%.2f") << ',' << r.statuses << ','
      << (r.oracle_ok ? 1 : 0) << ',' << '"' << r.error << '"' << '\n';
  }
}

void write_table(const RunReport& rep, const std::string& path) {
  std::ofstream f(path);
  f << rep.title << "\n";
  f << "---------------------------------------------------------------------------------\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %3s %10s %12s %12s %7s  %-34s\n", "kind", "N", "h_max",
                "h_certified", "h_spectral", "oracle", "K");
  f << buf;
  for (const auto& r : rep.rows) {
    const char* oracle = std::isnan(r.oracle_abscissa) ? "-" : (r.oracle_ok ? "ok" : "FAIL");
    std::snprintf(buf, sizeof buf, "%-16s %3d %10s %12s %12s %7s  %-34s\n", r.kind.c_str(), r.order,
                  fmt(r.h_max).c_str(), fmt(r.h_thm1).c_str(), fmt(r.h_spectral).c_str(), oracle,
                  r.error.empty() ? gain_string(r.gain).c_str() : r.error.c_str());
    f << buf;
  }
}

}  // namespace

bool RunReport::any_error() const {
  return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return !r.error.empty(); });
}

RunReport run(const ProblemConfig& cfg) {
  RunReport rep;
  rep.title = "run: " + cfg.source_path;
  rep.seed = cfg.seed;
  std::vector<std::function<ReportRow()>> tasks;
  for (int order : cfg.orders)
    tasks.push_back([&cfg, order]() { return run_one(cfg, order); });
  rep.rows = pooled(tasks, cfg.jobs);
  return rep;
}

void write_report(const RunReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_csv(rep, dir + "/report.csv");
  write_table(rep, dir + "/table.txt");
  json j;
  j["title"] = rep.title;
  j["seed"] = rep.seed;
  j["rows"] = json::array();
  for (const auto& r : rep.rows) j["rows"].push_back(row_json(r));
  std::ofstream f(dir + "/report.json");
  f << j.dump(2) << "\n";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::CertifiedAtH: return "certified-at-h";
    case Verdict::SpectralStableAtH: return "spectral-stable-at-h";
    case Verdict::Neither: return "neither";
  }
  return "unknown";
}

Verdict validate_gain(const ProblemConfig& cfg, const Mat& gain, int order, double h) {
  if (gain.rows() != cfg.b.cols() || gain.cols() != cfg.c.rows())
    throw Error(Errc::DimensionMismatch, "gain dimensions do not match the plant");
  DelaySystem sys{cfg.a, cfg.b, cfg.c, cfg.a1};
  const Mat a_d = sys.delayed_matrix(gain);

  const bool spectral_ok = spectral_abscissa(cfg.a, a_d, h).abscissa < 0.0;

  SolverOptions sopts;
  sopts.gap_tol = cfg.solver_tol;
  sopts.feas_tol = cfg.solver_tol;
  const SdpProblem prob = analysis_problem_projected(cfg.a, a_d, order, h, cfg.delta_scale);
  const bool certified = solve(prob, sopts).status == SolveStatus::Feasible;

  if (certified && spectral_ok) return Verdict::CertifiedAtH;
  if (spectral_ok) return Verdict::SpectralStableAtH;
  return Verdict::Neither;
}

RunReport reproduce(const std::string& out_dir, const ReproduceSections& sections, int jobs,
                    unsigned seed, double solver_tol) {
  std::filesystem::create_directories(out_dir);
  const DelaySystem ex1 = fixtures::example1();
  const DelaySystem ex2 = fixtures::example2();

  ProblemConfig base;
  base.a = ex1.a;
  base.b = ex1.b;
  base.c = ex1.c;
  base.k0 = fixtures::example1_k0();
  base.seed = seed;
  base.solver_tol = solver_tol;
  base.source_path = "<bundled>";

  std::vector<std::function<ReportRow()>> tasks;
  auto synth_task = [&](RunMode mode, SlackChoice slack, const std::string& preset, int order) {
    ProblemConfig cfg = base;
    cfg.mode = mode;
    cfg.slack = slack;
    cfg.preset = preset;
    tasks.push_back([cfg, order]() { return run_one(cfg, order); });
  };

  if (sections.table1 || sections.table2 || sections.fig1)
    for (int n : {1, 2, 3}) synth_task(RunMode::Ssf, SlackChoice::Jordan, "", n);
  if (sections.fixtures) {
    for (int n : {1, 2, 3}) {
      ProblemConfig cfg = base;
      tasks.push_back([cfg, n, &ex1]() {
        ReportRow row;
        row.kind = "fixture";
        row.order = n;
        try {
          row.gain = fixtures::example1_reference_gain(n);
          fill_margins(row, ex1, row.gain, n, cfg);
        } catch (const Error& e) {
          row.error = std::string(errc_name(e.code())) + ": " + e.what();
        }
        return row;
      });
    }
    // Soft hierarchy check: certified margin of one fixed closed loop as the
    // order grows. A decrease is flagged, not failed (the simplified
    // positivity condition is slightly more conservative).
    for (int n : {1, 2, 3}) {
      ProblemConfig cfg = base;
      tasks.push_back([cfg, n, &ex1]() {
        ReportRow row;
        row.kind = "hierarchy";
        row.order = n;
        try {
          const Mat a_d = ex1.delayed_matrix(fixtures::example1_reference_gain(1));
          MaxDelayOptions mopts;
          mopts.tol = cfg.bisect_tol;
          mopts.solver.gap_tol = cfg.solver_tol;
          mopts.solver.feas_tol = cfg.solver_tol;
          row.h_thm1 = max_delay_analysis(ex1.a, a_d, n, mopts).h_max;
        } catch (const Error& e) {
          row.error = std::string(errc_name(e.code())) + ": " + e.what();
        }
        return row;
      });
    }
  }
  if (sections.presets)
    for (const char* preset : {"eps1", "eps2"})
      for (int n : {1, 2, 3}) synth_task(RunMode::FixedEps, SlackChoice::Jordan, preset, n);
  if (sections.fig1) {
    for (int n : {1, 2, 3}) synth_task(RunMode::Ssf, SlackChoice::Full, "", n);
    for (int n : {1, 2, 3}) synth_task(RunMode::Sof, SlackChoice::Jordan, "", n);
  }
  if (sections.example2) {
    ProblemConfig cfg = base;
    cfg.a = ex2.a;
    cfg.b = ex2.b;
    cfg.c = ex2.c;
    cfg.k0 = fixtures::example2_k0();
    cfg.mode = RunMode::Ssf;
    tasks.push_back([cfg]() {
      ReportRow row = run_one(cfg, 1);
      row.kind = "example2-ssf";
      return row;
    });
  }

  RunReport rep;
  rep.title = "bundled benchmark reproduction";
  rep.seed = seed;
  rep.rows = pooled(tasks, jobs);

  // Flag any certified-margin decrease across orders on the fixed loop.
  {
    ReportRow* prev = nullptr;
    for (auto& r : rep.rows) {
      if (r.kind != "hierarchy") continue;
      if (prev && !std::isnan(prev->h_thm1) && r.h_thm1 < prev->h_thm1 - 1e-6)
        r.note = "hierarchy decrease vs N=" + std::to_string(prev->order);
      prev = &r;
    }
  }
  write_report(rep, out_dir);

  auto rows_of = [&](const std::string& kind) {
    std::vector<const ReportRow*> out;
    for (const auto& r : rep.rows)
      if (r.kind == kind) out.push_back(&r);
    std::sort(out.begin(), out.end(),
              [](const ReportRow* a, const ReportRow* b) { return a->order < b->order; });
    return out;
  };

  if (sections.table1 || sections.fixtures) {
    std::ofstream f(out_dir + "/table1.csv");
    f << "section,N,h_synth,K,h_certified,h_spectral\n";
    for (const auto* r : rows_of("ssf"))
      f << "synth-ssf," << r->order << ',' << fmt(r->h_max, "%.6g") << ",\"" << gain_string(r->gain)
        << "\"," << fmt(r->h_thm1, "%.6g") << ',' << fmt(r->h_spectral, "%.6g") << '\n';
    for (const auto* r : rows_of("fixture"))
      f << "fixture," << r->order << ",-,\"" << gain_string(r->gain) << "\","
        << fmt(r->h_thm1, "%.6g") << ',' << fmt(r->h_spectral, "%.6g") << '\n';
    for (const char* preset : {"fixed-eps:eps1", "fixed-eps:eps2"})
      for (const auto* r : rows_of(preset))
        f << preset << ',' << r->order << ',' << fmt(r->h_max, "%.6g") << ",\""
          << gain_string(r->gain) << "\"," << fmt(r->h_thm1, "%.6g") << ','
          << fmt(r->h_spectral, "%.6g") << '\n';
  }

  if (sections.fig1) {
    std::ofstream f(out_dir + "/fig1.csv");
    f << "N,h_full,h_ssf,h_sof\n";
    const auto full = rows_of("full");
    const auto ssf = rows_of("ssf");
    const auto sof = rows_of("sof");
    for (std::size_t i = 0; i < 3 && i < full.size() && i < ssf.size() && i < sof.size(); ++i)
      f << (i + 1) << ',' << fmt(full[i]->h_max, "%.6g") << ',' << fmt(ssf[i]->h_max, "%.6g") << ','
        << fmt(sof[i]->h_max, "%.6g") << '\n';
  }

  if (sections.table2) {
    std::ofstream f(out_dir + "/table2.csv");
    f << "N,h_max,rounds,avg_solver_iterations_per_step\n";
    for (const auto* r : rows_of("ssf"))
      f << r->order << ',' << fmt(r->h_max, "%.6g") << ',' << r->rounds << ','
        << fmt(r->avg_solver_iterations, "%.2f") << '\n';
  }

  if (sections.example2) {
    std::ofstream f(out_dir + "/example2.txt");
    for (const auto* r : rows_of("example2-ssf"))
      f << "N=" << r->order << "  h_max=" << fmt(r->h_max) << "  K=" << gain_string(r->gain)
        << "  h_certified=" << fmt(r->h_thm1) << "  h_spectral=" << fmt(r->h_spectral)
        << (r->error.empty() ? "" : ("  error=" + r->error)) << "\n";
  }

  return rep;
}

}  // namespace tdsyn
