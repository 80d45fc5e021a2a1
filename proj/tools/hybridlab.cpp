// Command-line entry point: chart, frf, frf-nl, validate.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <tuple>

#include "CLI11.hpp"

#include "hybridlab/config.hpp"
#include "hybridlab/experiments.hpp"
#include "hybridlab/io.hpp"
#include "hybridlab/validation.hpp"

using namespace hybridlab;

namespace {

enum Exit { kOk = 0, kUsage = 1, kFailed = 2, kRuntime = 3 };

struct Overrides {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> storeys, nodes, harmonics;
  std::optional<double> mass_ratio, tau, noise;
  std::string tau_range, p_range, f_range, grid, from;
  std::vector<int> checks;
  bool no_boundaries = false;
};

std::pair<double, double> parse_pair(const std::string& text, char sep, const std::string& flag) {
  const auto at = text.find(sep);
  if (at == std::string::npos) throw ValidationError(flag + " expects a" + sep + "b");
  try {
    return {std::stod(text.substr(0, at)), std::stod(text.substr(at + 1))};
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + flag + " '" + text + "'");
  }
}

ExperimentConfig build(const Overrides& o, const std::string& command) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (!o.out.empty()) cfg.output = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.storeys) {
    if (*o.storeys != 4 && *o.storeys != 5) throw ValidationError("--storeys must be 4 or 5");
    cfg.model.storeys = *o.storeys;
    cfg.model.chain.clear();
  }
  if (o.mass_ratio) {
    cfg.model.mass_ratio = *o.mass_ratio;
    cfg.frf.mass_ratios = {*o.mass_ratio};
    cfg.nonlinear.mass_ratio = *o.mass_ratio;
  }
  if (o.tau) {
    cfg.model.tau = *o.tau;
    cfg.chart.tau_min = cfg.chart.tau_max = *o.tau;
    cfg.chart.tau_cells = 1;
  }
  if (!o.tau_range.empty()) std::tie(cfg.chart.tau_min, cfg.chart.tau_max) = parse_pair(o.tau_range, ':', "--tau-range");
  if (!o.p_range.empty()) std::tie(cfg.chart.p_min, cfg.chart.p_max) = parse_pair(o.p_range, ':', "--p-range");
  if (!o.f_range.empty()) {
    const auto [a, b] = parse_pair(o.f_range, ':', "--f-range");
    if (command == "frf-nl") {
      cfg.nonlinear.f_start = a;
      cfg.nonlinear.f_end = b;
    } else {
      cfg.frf.f_start = a;
      cfg.frf.f_end = b;
    }
  }
  if (!o.grid.empty()) {
    const auto [nt, np] = parse_pair(o.grid, 'x', "--grid");
    if (nt < 1 || np < 1) throw ValidationError("--grid needs positive cell counts");
    cfg.chart.tau_cells = static_cast<std::size_t>(nt);
    cfg.chart.p_cells = static_cast<std::size_t>(np);
    // The boundary search seeds on the same lattice.
    cfg.chart.bisection.seed_tau = std::max(2, static_cast<int>(nt));
    cfg.chart.bisection.seed_p = std::max(2, static_cast<int>(np));
  }
  if (o.nodes) cfg.chart.nodes = *o.nodes;
  if (o.no_boundaries) cfg.chart.boundaries = false;
  if (o.harmonics) {
    if (command == "frf") cfg.frf.solve.harmonics = *o.harmonics;
    else cfg.nonlinear.refine_harmonics = *o.harmonics;
  }
  if (!o.from.empty()) cfg.nonlinear.from = o.from;
  if (o.noise) cfg.rig.displacement_noise = *o.noise;
  if (!o.checks.empty()) cfg.validation.checks = o.checks;
  cfg.validate();
  return cfg;
}

void report_files(const std::string& dir, const std::vector<std::string>& files) {
  std::cout << "wrote " << files.size() + 1 << " files to " << dir << " (manifest.json";
  for (const auto& f : files) std::cout << ", " << f;
  std::cout << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delayed hybrid-test stability charts and control-based continuation"};
  app.require_subcommand(1);
  Overrides o;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    c->add_option("--out", o.out, "Output directory of this run");
    c->add_option("--seed", o.seed, "RNG seed");
    c->add_option("--storeys", o.storeys, "Reference building size (4 or 5)");
    c->add_option("--mass-ratio", o.mass_ratio, "Numerical share p of the interface mass");
    c->add_option("--tau", o.tau, "Delay (s)");
  };

  auto* chart = app.add_subcommand("chart", "Stability chart and oscillatory boundaries");
  common(chart);
  chart->add_option("--tau-range", o.tau_range, "tau_min:tau_max (s)");
  chart->add_option("--p-range", o.p_range, "p_min:p_max");
  chart->add_option("--grid", o.grid, "Cells as <tau>x<p>, e.g. 40x40");
  chart->add_option("--nodes", o.nodes, "Chebyshev collocation nodes");
  chart->add_flag("--no-boundaries", o.no_boundaries, "Skip the boundary-curve search");

  auto* frf = app.add_subcommand("frf", "Linear FRF by continuation, one branch per mass ratio");
  common(frf);
  frf->add_option("--f-range", o.f_range, "f_start:f_end (Hz)");
  frf->add_option("--harmonics", o.harmonics, "Harmonics in target and residual");
  frf->add_option("--noise", o.noise, "Displacement sensor noise std (m)");

  auto* nl = app.add_subcommand("frf-nl", "Bilinear FRF with folds, sweeps and refinement");
  common(nl);
  nl->add_option("--f-range", o.f_range, "f_start:f_end (Hz)");
  nl->add_option("--harmonics", o.harmonics, "Harmonics of the refined point");
  nl->add_option("--from", o.from, "Approach the peak from low, high or both")
      ->check(CLI::IsMember({"low", "high", "both"}));
  nl->add_option("--noise", o.noise, "Displacement sensor noise std (m)");

  auto* val = app.add_subcommand("validate", "Acceptance suite, one line per check");
  common(val);
  val->add_option("--checks", o.checks, "Subset of check ids (default: all)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* used = app.get_subcommands().front();
  const std::string command = used->get_name();
  ExperimentConfig cfg;
  try {
    cfg = build(o, command);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    const std::string dir = cfg.output;
    if (command == "chart") {
      const ChartRun r = run_chart(cfg, dir);
      std::size_t stab = 0;
      for (const auto& c : r.grid.cells) stab += c.label == CellLabel::stabilisable;
      std::cout << stab << "/" << r.grid.cells.size() << " cells stabilisable, "
                << r.boundaries.size() << " boundary curve(s)\n";
      report_files(dir, r.files);
    } else if (command == "frf") {
      const FrfRun r = run_frf(cfg, dir);
      for (const auto& c : r.cases)
        std::cout << ratio_tag(c.mass_ratio) << ": " << c.branch.points.size() << " points, "
                  << c.branch.evaluations << " rig evaluations, " << c.branch.message << '\n';
      report_files(dir, r.files);
    } else if (command == "frf-nl") {
      const NonlinearRun r = run_frf_nl(cfg, dir);
      for (std::size_t i = 0; i < r.branches.size(); ++i)
        std::cout << r.labels[i] << ": " << r.branches[i].points.size() << " points, "
                  << r.branches[i].fold_count() << " fold(s), " << r.branches[i].message << '\n';
      if (r.refined)
        std::cout << "refined " << cfg.nonlinear.refine_hz << " Hz: harmonic residual "
                  << r.refined->higher_before << " -> " << r.refined->higher_after << " m\n";
      report_files(dir, r.files);
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      const ValidationReport rep = run_validation(
          cfg, dir, [](const CheckResult& c) { std::cout << format_check(c) << std::endl; });
      write_report_json(join_path(dir, "report.json"), rep);
      RunManifest m;
      m.command = "validate";
      m.config = cfg;
      m.files = {"report.json"};
      m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      m.status = rep.passed() ? "ok" : "failed";
      write_manifest(dir, m);
      std::size_t passed = 0;
      for (const auto& c : rep.checks) passed += c.passed;
      std::cout << passed << "/" << rep.checks.size() << " checks passed\n";
      return rep.passed() ? kOk : kFailed;
    }
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
