#include "tdsyn/config.hpp"
#include "tdsyn/report.hpp"
#include "tdsyn/sdpa.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace tdsyn;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSolver = 4;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::ConfigInvalid:
    case Errc::DimensionMismatch:
    case Errc::ShapeMismatch:
      return kExitConfig;
    case Errc::InfeasibleAtDelay:
    case Errc::NoProgress:
    case Errc::NotStableAtZero:
    case Errc::NotStabilizable:
    case Errc::UnstableAtZero:
      return kExitInfeasible;
    default:
      return kExitSolver;
  }
}

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = "tdsyn-out";
  int seed = -1;
  int jobs = 0;
  double solver_tol = 0.0;
  bool verbose = false;
};

ProblemConfig load_with_overrides(const GlobalArgs& g, RunMode forced_mode, bool force_mode) {
  ProblemConfig cfg = load_config(g.config_path);
  if (force_mode) cfg.mode = forced_mode;
  if (g.seed >= 0) cfg.seed = static_cast<unsigned>(g.seed);
  if (g.jobs > 0) cfg.jobs = g.jobs;
  if (g.solver_tol > 0.0) cfg.solver_tol = g.solver_tol;
  if (g.verbose) std::cerr << "resolved config:\n" << dump_config(cfg);
  return cfg;
}

int finish_run(const RunReport& rep, const GlobalArgs& g) {
  write_report(rep, g.out_dir);
  std::ifstream table(g.out_dir + "/table.txt");
  std::cout << table.rdbuf();
  std::cout << "report written to " << g.out_dir << "\n";
  if (rep.any_error()) {
    for (const auto& r : rep.rows)
      if (!r.error.empty()) std::cerr << "row N=" << r.order << " failed: " << r.error << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-system stability certification and static gain synthesis"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--out", g.out_dir, "Output directory for reports");
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--jobs", g.jobs, "Worker pool size for order/preset sweeps");
  app.add_option("--solver-tol", g.solver_tol, "Override the interior-point tolerance");
  app.add_flag("--verbose", g.verbose, "Verbose diagnostics");

  auto add_config = [&](CLI::App* sub) {
    sub->fallthrough();  // global flags may follow the subcommand
    sub->add_option("--config", g.config_path, "Problem definition file")->required();
  };

  auto* analyze = app.add_subcommand("analyze", "Certified delay margin of a given delayed matrix");
  add_config(analyze);
  auto* ssf = app.add_subcommand("synth-ssf", "Static state feedback synthesis over the delay ramp");
  add_config(ssf);
  auto* sof = app.add_subcommand("synth-sof", "Static output feedback synthesis");
  add_config(sof);
  auto* maxdelay = app.add_subcommand("maxdelay", "Spectral (oracle) maximum stable delay");
  add_config(maxdelay);

  auto* validate = app.add_subcommand("validate", "Check a gain file at the config delay h");
  add_config(validate);
  std::string gain_path;
  validate->add_option("--gain", gain_path, "Whitespace matrix file with the gain")->required();

  auto* export_cmd = app.add_subcommand("export-sdpa", "Write the analysis problem in SDPA sparse format");
  add_config(export_cmd);
  std::string sdpa_path = "problem.dat-s";
  export_cmd->add_option("--file", sdpa_path, "Output .dat-s path");

  auto* reproduce_cmd = app.add_subcommand("reproduce", "Run the bundled benchmark problems");
  reproduce_cmd->fallthrough();
  std::vector<std::string> sections;
  reproduce_cmd->add_option("--sections", sections,
                            "Subset of {table1,fixtures,presets,fig1,example2,table2}");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) {
      return finish_run(run(load_with_overrides(g, RunMode::Analyze, true)), g);
    }
    if (ssf->parsed()) {
      return finish_run(run(load_with_overrides(g, RunMode::Ssf, true)), g);
    }
    if (sof->parsed()) {
      return finish_run(run(load_with_overrides(g, RunMode::Sof, true)), g);
    }
    if (maxdelay->parsed()) {
      ProblemConfig cfg = load_with_overrides(g, RunMode::Analyze, false);
      Mat a_d;
      if (cfg.a_d) {
        a_d = *cfg.a_d;
      } else if (cfg.k0) {
        DelaySystem sys{cfg.a, cfg.b, cfg.c, cfg.a1};
        a_d = sys.delayed_matrix(*cfg.k0);
      } else {
        throw Error(Errc::ConfigInvalid, "maxdelay needs 'Ad' or a gain 'K0' in the config");
      }
      const SpectralDelayResult res = spectral_max_delay(cfg.a, a_d, cfg.bisect_tol, cfg.h_cap);
      std::printf("h_max_spectral = %.6g%s\n", res.h_max, res.capped ? " (capped)" : "");
      return kExitOk;
    }
    if (validate->parsed()) {
      ProblemConfig cfg = load_with_overrides(g, RunMode::Analyze, false);
      if (!cfg.h) throw Error(Errc::ConfigInvalid, "validate needs 'h' in the config");
      const Mat gain = load_matrix_file(gain_path);
      const Verdict v = validate_gain(cfg, gain, cfg.orders.front(), *cfg.h);
      std::printf("verdict: %s (N = %d, h = %.6g)\n", verdict_name(v), cfg.orders.front(), *cfg.h);
      return v == Verdict::Neither ? kExitInfeasible : kExitOk;
    }
    if (export_cmd->parsed()) {
      ProblemConfig cfg = load_with_overrides(g, RunMode::Analyze, false);
      if (!cfg.h) throw Error(Errc::ConfigInvalid, "export-sdpa needs 'h' in the config");
      Mat a_d;
      if (cfg.a_d) {
        a_d = *cfg.a_d;
      } else if (cfg.k0) {
        DelaySystem sys{cfg.a, cfg.b, cfg.c, cfg.a1};
        a_d = sys.delayed_matrix(*cfg.k0);
      } else {
        throw Error(Errc::ConfigInvalid, "export-sdpa needs 'Ad' or 'K0' in the config");
      }
      const SdpProblem prob =
          analysis_problem_projected(cfg.a, a_d, cfg.orders.front(), *cfg.h, cfg.delta_scale);
      write_sdpa(sdpa_path, prob);
      std::printf("wrote %s (N = %d, h = %.6g)\n", sdpa_path.c_str(), cfg.orders.front(), *cfg.h);
      return kExitOk;
    }
    if (reproduce_cmd->parsed()) {
      ReproduceSections sec;
      if (!sections.empty()) {
        sec = {false, false, false, false, false, false};
        for (const auto& s : sections) {
          if (s == "table1") sec.table1 = true;
          else if (s == "fixtures") sec.fixtures = true;
          else if (s == "presets") sec.presets = true;
          else if (s == "fig1") sec.fig1 = true;
          else if (s == "example2") sec.example2 = true;
          else if (s == "table2") sec.table2 = true;
          else throw Error(Errc::ConfigInvalid, "unknown section '" + s + "'");
        }
      }
      const unsigned seed = g.seed >= 0 ? static_cast<unsigned>(g.seed) : 0u;
      const double tol = g.solver_tol > 0.0 ? g.solver_tol : 1e-9;
      const RunReport rep = reproduce(g.out_dir, sec, std::max(1, g.jobs), seed, tol);
      std::ifstream table(g.out_dir + "/table.txt");
      std::cout << table.rdbuf();
      std::cout << "reproduction written to " << g.out_dir << "\n";
      return rep.any_error() ? kExitInfeasible : kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}
