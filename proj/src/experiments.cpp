#include "hybridlab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "hybridlab/io.hpp"

namespace hybridlab {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class Output {
 public:
  explicit Output(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) ensure_directory(dir_);
  }
  bool enabled() const { return !dir_.empty(); }
  /// Full path for `name`, recorded in the manifest list.
  std::string path(const std::string& name) {
    files_.push_back(name);
    return join_path(dir_, name);
  }
  void finish(const std::string& command, const ExperimentConfig& cfg, double seconds) {
    if (!enabled()) return;
    RunManifest m;
    m.command = command;
    m.config = cfg;
    m.files = files_;
    m.seconds = seconds;
    write_manifest(dir_, m);
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

std::vector<double> grid_hz(double f0, double f1, std::size_t n) {
  if (f0 == f1 || n < 2) return {kTwoPi * f0};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = kTwoPi * (f0 + (f1 - f0) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

Vector top_forcing(const NumSubConfig& numeric) {
  Vector f = Vector::Zero(4);
  f(3) = numeric.forcing;
  return f;
}

}  // namespace

std::string ratio_tag(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%g", p);
  return buf;
}

ChartRun run_chart(const ExperimentConfig& cfg, const std::string& dir) {
  cfg.validate();
  const auto t0 = Clock::now();
  Output out(dir);
  const auto& c = cfg.chart;
  const HybridFamily family = storey_family(cfg.model.build_chain(), cfg.model.interface_storey);

  ChartRun run;
  run.grid = stability_chart(family, cell_centres(c.tau_min, c.tau_max, c.tau_cells),
                             cell_centres(c.p_min, c.p_max, c.p_cells), c.nodes);
  const bool boundaries = c.boundaries && c.tau_max > c.tau_min && c.p_max > c.p_min;
  if (boundaries) {
    SearchBox box;
    box.tau_min = c.tau_min;
    box.tau_max = c.tau_max;
    box.p_min = c.p_min;
    box.p_max = c.p_max;
    run.boundaries = find_oscillatory_boundaries(family, box, c.bisection);
  }
  if (out.enabled()) {
    write_chart_csv(out.path("chart.csv"), run.grid);
    if (boundaries) write_boundaries_csv(out.path("boundaries.csv"), run.boundaries);
  }
  run.files = out.files();
  out.finish("chart", cfg, since(t0));
  return run;
}

FrfRun run_frf(const ExperimentConfig& cfg, const std::string& dir) {
  cfg.validate();
  const auto t0 = Clock::now();
  Output out(dir);
  const auto& f = cfg.frf;
  const double w0 = kTwoPi * f.f_start, w1 = kTwoPi * f.f_end;

  FrfRun run;
  for (double p : f.mass_ratios) {
    const RigConfig rc = cfg.linear_rig(p);
    const StructuralMatrices truth = rig_true_assembly(rc.plant, rc.numeric);
    const Vector forcing = top_forcing(rc.numeric);
    Rig rig(rc);
    FrfCase c;
    c.mass_ratio = p;
    c.branch = continue_frf(w0, w1, rig, f.solve);
    std::vector<double> ws;
    for (const auto& pt : c.branch.points) ws.push_back(pt.omega);
    if (!ws.empty()) {
      const ComplexFrf o = linear_frf(truth, forcing, ws);
      for (const auto& x : o.response) c.oracle_amplitude.push_back(std::abs(x(2)));
    }
    if (run.cases.empty())
      run.oracle = linear_frf(truth, forcing, grid_hz(f.f_start, f.f_end, f.oracle_points));
    if (out.enabled()) {
      const std::string tag = ratio_tag(p);
      write_branch_csv(out.path("branch_" + tag + ".csv"), c.branch);
      write_histogram_csv(out.path("histogram_" + tag + ".csv"), c.branch);
      write_coefficients_json(out.path("coefficients_" + tag + ".json"), c.branch);
    }
    run.cases.push_back(std::move(c));
  }
  if (out.enabled() && !run.cases.empty()) write_frf_csv(out.path("oracle_frf.csv"), run.oracle, 2);
  run.files = out.files();
  out.finish("frf", cfg, since(t0));
  return run;
}

RefinedPoint refine_nonlinear_point(const ExperimentConfig& cfg, double f_hz, double h) {
  RigConfig rc = cfg.nonlinear_rig();
  rc.numeric.h = h;
  Rig rig(rc);
  SolveSettings base = cfg.nonlinear.solve;
  base.harmonics = 1;
  const double w = kTwoPi * f_hz;
  FrfBranch start = continue_frf(w, w, rig, base);
  if (start.points.empty()) throw SolverError("fundamental solve failed: " + start.message);
  SolveSettings refine = cfg.nonlinear.solve;
  refine.harmonics = cfg.nonlinear.refine_harmonics;
  refine.max_iterations = cfg.nonlinear.refine_iterations;
  return match_higher_harmonics(start.points.front(), rig, refine);
}

NonlinearRun run_frf_nl(const ExperimentConfig& cfg, const std::string& dir) {
  cfg.validate();
  const auto t0 = Clock::now();
  Output out(dir);
  const auto& n = cfg.nonlinear;
  const double w0 = kTwoPi * n.f_start, w1 = kTwoPi * n.f_end;

  NonlinearRun run;
  auto branch = [&](const std::string& label, double from, double to) {
    Rig rig(cfg.nonlinear_rig());
    run.branches.push_back(continue_frf(from, to, rig, n.solve));
    run.labels.push_back(label);
    if (out.enabled()) {
      write_branch_csv(out.path("branch_" + label + ".csv"), run.branches.back());
      write_histogram_csv(out.path("histogram_" + label + ".csv"), run.branches.back());
      write_coefficients_json(out.path("coefficients_" + label + ".json"), run.branches.back());
    }
  };
  if (n.from == "low" || n.from == "both") branch("low", w0, w1);
  if (n.from == "high" || n.from == "both") branch("high", w1, w0);

  if (n.refine_hz > 0.0) {
    run.refined = refine_nonlinear_point(cfg, n.refine_hz, n.h);
    if (out.enabled()) {
      write_lissajous_csv(out.path("lissajous_fundamental.csv"), run.refined->before);
      write_lissajous_csv(out.path("lissajous_refined.csv"), run.refined->after);
    }
  }

  if (n.sweep_oracle) {
    const RigConfig rc = cfg.nonlinear_rig();
    NumSubConfig numeric = rc.numeric;
    numeric.h = n.sweep_h;
    const auto steps = static_cast<std::size_t>(std::llround((n.f_end - n.f_start) / n.sweep_step_hz));
    std::vector<double> ws;
    for (std::size_t i = 0; i <= steps; ++i)
      ws.push_back(kTwoPi * (n.f_start + static_cast<double>(i) * n.sweep_step_hz));
    run.up = nonlinear_sweep_frf(rc.plant, numeric, ws, SweepDirection::up);
    run.down = nonlinear_sweep_frf(rc.plant, numeric, ws, SweepDirection::down);
    if (out.enabled()) {
      write_sweep_csv(out.path("sweep_up.csv"), *run.up);
      write_sweep_csv(out.path("sweep_down.csv"), *run.down);
    }
  }
  run.files = out.files();
  out.finish("frf-nl", cfg, since(t0));
  return run;
}

}  // namespace hybridlab
