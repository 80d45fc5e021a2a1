#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hybridlab/fourier.hpp"
#include "hybridlab/model.hpp"
#include "hybridlab/types.hpp"

namespace hybridlab {

// ---------------------------------------------------------------------------
// Restoring force of the storey 2-3 leg

enum class RestoringMode { linear, bilinear };

std::string to_string(RestoringMode mode);
RestoringMode restoring_mode_from_string(const std::string& name);

/// Two straight lines f = k dx + c meeting at `x_break`; the `minus` line
/// holds for dx < x_break.
struct BilinearLaw {
  double k_minus = 45052.0, c_minus = 0.0;
  double k_plus = 45052.0, c_plus = 0.0;
  double x_break = 0.0;

  /// Law through the origin with slope `k_minus` below the break.
  static BilinearLaw through_origin(double k_minus, double k_plus, double x_break);
  /// Soft slope ratio * k_plus below a break placed `gap` under the static
  /// deflection produced by `preload` on the stiff side.
  static BilinearLaw softening_below(double preload, double k_plus, double ratio, double gap);
  void validate() const;
};

/// Linear mode uses `k_linear`; bilinear mode ignores it.
double restoring_force(double dx, RestoringMode mode, double k_linear, const BilinearLaw& law);

// ---------------------------------------------------------------------------
// Configuration

struct PlantConfig {
  /// Physical storeys ground-up; storey 3 carries the full hardware floor mass.
  std::array<StoreySpec, 3> storeys{};
  double shaker_gain = 10.0;   // N/V
  double actuator_lag = 0.0;   // s, first-order lag time constant (0 = ideal)
  double displacement_noise = 0.0;  // m, std of additive sensor noise
  double force_noise = 0.0;         // N
  std::uint64_t seed = 1;
  RestoringMode mode = RestoringMode::linear;
  BilinearLaw bilinear;
  double preload = 0.0;  // N, static shaker force on storey 3

  /// Identified three-storey bench-top structure, linear, noise free.
  static PlantConfig reference();
  /// Reference plant with the softening contact leg and 26.68 N preload.
  static PlantConfig reference_bilinear();
  void validate() const;
};

struct NumSubConfig {
  double mu3 = 0.5 * kReferenceInterfaceMass;  // kg
  double mu4 = 10.74;                          // kg
  double gamma4 = 3.7421;                      // N s/m
  double sigma4 = 45052.0;                     // N/m
  double forcing = 1.0;                        // N, amplitude on storey 4
  double h = 1e-4;                             // s
  double kp_hat = 5e4;                         // N/m
  double kd_hat = 200.0;                       // N s/m
  double m3comp = 0.5 * kReferenceInterfaceMass;  // kg

  /// Numerical storeys for mass ratio p = mu3 / (m3 + mu3) of the reference
  /// interface floor; the compensation mass follows mu3.
  static NumSubConfig reference(double mass_ratio);
  void validate() const;
};

struct PhysicalGains {
  double kp = 100.0;  // V/m
  double kd = 10.0;   // V s/m
};

/// Oscillating displacement target for storey 3 (about the static offset
/// held by the rig) and the shaker PD gains.
struct ControlTarget {
  FourierSignal target;
  PhysicalGains gains;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Elementary laws

/// U = kp (x* - x3) + kd (x*' - x3') at time t (phase omega t).
double shaker_demand(const ControlTarget& target, double x3, double v3, double t);
double shaker_demand_at_phase(const ControlTarget& target, double x3, double v3, double theta);
/// Same law from cos(theta) and sin(theta) of the target phase.
double shaker_demand_cs(const ControlTarget& target, double x3, double v3, double c1, double s1);

/// F_ctrl = kp_hat (x3 - xi3) + kd_hat (x3' - xi3').
double numerical_grounding_force(double x3, double v3, double xi3, double xi3_dot, double kp_hat,
                                 double kd_hat);

// ---------------------------------------------------------------------------
// Physical substructure

struct PlantState {
  std::array<double, 3> x{}, v{};
  double lag = 0.0;  // actuator filter output, V
};

/// Storey accelerations for a given shaker force (N).
std::array<double, 3> plant_acceleration(const PlantConfig& cfg, const PlantState& s,
                                         double shaker_force);
/// Force the shaker applies for the current filter state and demand.
double shaker_force(const PlantConfig& cfg, const PlantState& s, double U);

/// One RK4 step of the plant with the demand U held over dt.
/// Rest state under the static preload alone.
PlantState static_equilibrium(const PlantConfig& cfg);

PlantState step_physical(const PlantConfig& cfg, const PlantState& state, double U, double dt);

/// Kinetic plus elastic energy of the plant (linear leg law).
double plant_energy(const PlantConfig& cfg, const PlantState& s);

// ---------------------------------------------------------------------------
// Numerical substructure, z = (xi3', xi4', xi3, xi4)

using NumState = Eigen::Vector4d;

class NumericalSubstructure {
 public:
  explicit NumericalSubstructure(const NumSubConfig& cfg);

  const NumSubConfig& config() const { return cfg_; }
  const Eigen::Matrix4d& A() const { return A_; }
  /// (I - h A)^{-1}
  const Eigen::Matrix4d& resolvent() const { return R_; }
  /// Input vector for F_num on xi3 and F_forc on xi4.
  NumState input(double f_num, double f_forc) const;
  /// z_{i+1} = (I - h A)^{-1} (z_i + h b_i).
  NumState step(const NumState& z, double f_num, double f_forc) const;

 private:
  NumSubConfig cfg_;
  Eigen::Matrix4d A_, R_;
};

/// Implicit-Euler update with F_num = F_comp - F_LC + F_ctrl.
NumState step_numeric(const NumericalSubstructure& sub, const NumState& z, double f_lc,
                      double f_ctrl, double f_forc, double f_comp);

// ---------------------------------------------------------------------------
// Coupled rig

struct RigConfig {
  PlantConfig plant = PlantConfig::reference();
  NumSubConfig numeric;
  PhysicalGains gains;
  int settle_periods = 50;
  int measure_periods = 4;
  /// Relative change allowed between the fundamentals of the last two periods.
  double steady_tolerance = 5e-4;
  /// Absolute floor of that check (m); raised automatically under noise.
  double steady_floor = 1e-9;
  /// Extra measurement windows tried before giving up on steady state.
  int max_extra_windows = 10;

  void validate() const;
};

struct RigSample {
  double t;
  std::array<double, 3> x;
  double xi3, xi4, f_lc, f_ctrl, u;
};

struct SteadyState {
  double omega = 0.0;
  FourierSignal x3, xi3;
  /// Mean-removed RMS over the measured window.
  double rms_ctrl = 0.0, rms_lc = 0.0;
  std::size_t samples = 0;
  int extra_windows = 0;
  /// Measured window (filled when window keeping is enabled).
  std::vector<double> x3_window, xi3_window;
};

class Rig {
 public:
  explicit Rig(RigConfig cfg);

  const RigConfig& config() const { return cfg_; }
  const NumericalSubstructure& numerical() const { return num_; }

  /// Drive the rig with `target` at `omega`, wait for steady state and return
  /// the Fourier coefficients (up to `harmonics`, at least those of the
  /// target) of both interface displacements. The rig state carries over to
  /// the next call.
  SteadyState run_to_steady_state(const ControlTarget& target, double omega, int harmonics = 0);
  SteadyState run_to_steady_state(const ControlTarget& target, double omega, int harmonics,
                                  int settle_periods, int measure_periods);

  /// Back to rest at t = 0 with a fresh noise stream.
  void reset();

  void keep_window(bool on) { keep_window_ = on; }
  /// Record every `stride`-th step of the measured windows (0 = off).
  void record(std::size_t stride) { record_stride_ = stride; }
  const std::vector<RigSample>& recorded() const { return samples_; }
  void clear_recorded() { samples_.clear(); }

  double time() const { return t_; }
  std::size_t evaluations() const { return evaluations_; }
  std::size_t steps() const { return steps_; }
  const PlantState& plant_state() const { return plant_; }
  const NumState& numerical_state() const { return z_; }
  /// Storey-3 static deflection under the preload; the shaker target
  /// oscillates about it so the PD loop carries no mean force.
  double static_offset() const { return offset_; }

 private:
  struct Readings {
    double x3, f_lc, f_ctrl, u;
  };
  Readings advance(const ControlTarget& target, double omega);
  void rest();

  RigConfig cfg_;
  NumericalSubstructure num_;
  PlantState plant_;
  NumState z_ = NumState::Zero();
  double t_ = 0.0, theta_ = 0.0;
  double offset_ = 0.0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  bool keep_window_ = false;
  std::size_t record_stride_ = 0;
  std::vector<RigSample> samples_;
  std::size_t evaluations_ = 0, steps_ = 0;
};

void write_time_series_csv(const std::string& path, const std::vector<RigSample>& samples);
void write_lissajous_csv(const std::string& path, const SteadyState& state);

}  // namespace hybridlab
