#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hybridlab/continuation.hpp"
#include "hybridlab/model.hpp"
#include "hybridlab/rig.hpp"
#include "hybridlab/stability.hpp"

namespace hybridlab {

struct ModelSection {
  int storeys = 4;  // reference building size, ignored when `chain` is given
  std::vector<StoreySpec> chain;
  std::size_t interface_storey = kReferenceInterfaceStorey;
  double mass_ratio = 0.5;
  double tau = 5e-5;  // s

  StoreyChainSpec build_chain() const;
};

struct ChartSection {
  double tau_min = 5e-5, tau_max = 30e-5;
  double p_min = 0.01, p_max = 1.0;
  std::size_t tau_cells = 40, p_cells = 40;
  int nodes = 32;
  bool boundaries = true;
  BisectionSettings bisection;
};

/// Rig settings shared by the linear and nonlinear sweeps.
struct RigSection {
  double shaker_gain = 10.0;
  double actuator_lag = 0.0;
  double displacement_noise = 0.0;
  double force_noise = 0.0;
  PhysicalGains gains;
  double kp_hat = 5e4, kd_hat = 200.0;
  double forcing = 1.0;
  double h = 1e-4;
  int settle_periods = 50;
  int measure_periods = 4;
  double steady_tolerance = 5e-4;
  int max_extra_windows = 10;
};

struct FrfSection {
  std::vector<double> mass_ratios{0.33, 0.5, 0.67};
  double f_start = 12.0, f_end = 14.0;  // Hz
  SolveSettings solve;
  std::size_t oracle_points = 401;
};

struct NonlinearSection {
  double mass_ratio = 0.5;
  double preload = 26.68;  // N
  /// Soft slope as a fraction of the nominal storey-3 stiffness and the
  /// distance of the break below the preloaded deflection.
  double soft_ratio = 0.7;
  double gap = 1e-4;  // m
  double f_start = 13.0, f_end = 13.6;  // Hz
  double h = 2e-6;
  /// "low", "high" or "both".
  std::string from = "low";
  SolveSettings solve;
  /// Point refined with `refine_harmonics` harmonics for the Lissajous export.
  double refine_hz = 13.3;
  int refine_harmonics = 3;
  /// The refined solve starts far from its fixed point and needs more room.
  int refine_iterations = 40;
  bool sweep_oracle = true;
  double sweep_step_hz = 0.01;
  double sweep_h = 1e-4;

  NonlinearSection();
};

/// Thresholds and run settings of the acceptance suite.
struct ValidationSection {
  std::vector<int> checks;  // empty = all
  double boundary_p = 0.5, boundary_tolerance = 0.05;
  /// Mass ratio expected to be unstable for every delay of the chart.
  double unstable_p = 0.33;
  double scalar_tolerance = 0.01;
  double fidelity_tolerance = 0.01;
  double gate_rel = 1e-3, gate_abs = 1e-4;
  double median_iterations = 5.0;
  double invasiveness = 0.01;
  double transfer_tolerance = 1e-6;
  std::size_t min_points = 40;
  std::size_t random_points = 10;
  /// Linear fidelity run: step, settle and solver tolerance.
  double linear_h = 1e-6;
  int linear_settle = 25;
  double linear_rel_tol = 1e-4;
  double linear_ds = 0.12, linear_ds_max = 0.15;
  /// Solver tolerance of the Broyden check.
  double broyden_rel_tol = 1e-6;
  /// Step of the single-point refinement check.
  double refine_h = 1e-5;
};

struct ExperimentConfig {
  ModelSection model;
  ChartSection chart;
  RigSection rig;
  FrfSection frf;
  NonlinearSection nonlinear;
  ValidationSection validation;
  std::string output = "out";
  std::uint64_t seed = 1;

  void validate() const;

  /// Linear rig for mass ratio p built from the model chain (storeys 1-3
  /// physical, storey 4 numerical) and the rig section.
  RigConfig linear_rig(double p) const;
  /// Bilinear, preloaded rig of the nonlinear section.
  RigConfig nonlinear_rig() const;
};

/// Parse JSON text; unknown keys anywhere are rejected with ValidationError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Full JSON form of a config (every field, defaults included).
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);

}  // namespace hybridlab
