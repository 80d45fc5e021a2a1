#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hybridlab/rig.hpp"
#include "hybridlab/types.hpp"

namespace hybridlab {

struct SolveSettings {
  int harmonics = 1;
  /// Acceptance: max |Phi| <= max(rel_tol * |fundamental|, abs_tol).
  double rel_tol = 1e-3;
  double abs_tol = 1e-8;  // m
  int max_iterations = 15;
  double m_min = 1.0 / 64.0;
  double fd_coefficient = 1e-5;  // m
  double fd_omega = 1e-2;        // rad/s
  /// Reference scales of the arclength metric.
  double amplitude_floor = 1e-4;  // m
  double omega_scale = kTwoPi;    // rad/s
  double ds = 0.04;
  double ds_min = 1e-3;
  double ds_max = 0.045;
  double ds_growth = 1.2;
  /// Iterations at or below this count as an easy point for step growth.
  int easy_iterations = 3;
  /// Frequency spacing (Hz) of the two natural-continuation start points.
  double start_step_hz = 0.02;
  std::size_t max_points = 400;
  /// Scaled Jacobian condition number above which a warning flag is set.
  double condition_limit = 1e12;
  /// Start each branch solve from the previous point's Jacobian instead of a
  /// fresh finite-difference estimate.
  bool reuse_jacobian = true;
  /// Multiplier on the first Newton step (1 = plain Newton).
  double first_step_scale = 1.0;

  void validate() const;
};

/// u = (A*_1..A*_N, B*_1..B*_N, omega).
Vector make_target_vector(const FourierSignal& target);
FourierSignal target_signal(const Vector& u, int harmonics);
double target_omega(const Vector& u);

/// Diagonal metric of the arclength condition: coefficients divided by the
/// amplitude scale, omega by the frequency scale.
Vector arclength_weights(const Vector& u, const SolveSettings& settings);

/// Evaluation of the interface mismatch at one target.
struct Residual {
  Vector values;  // (A_k - alpha_k, B_k - beta_k), optionally the arclength row
  SteadyState state;
};

Residual residual(const Vector& u, Rig& rig, const SolveSettings& settings);

/// Arclength row (W s) . (u_pred - u) with W = diag(weights)^2.
double arclength_row(const Vector& u, const Vector& secant, const Vector& prediction,
                     const Vector& weights);
Residual extended_residual(const Vector& u, const Vector& secant, const Vector& prediction,
                           const Vector& weights, Rig& rig, const SolveSettings& settings);

enum class JacobianProvenance { finite_difference, broyden };

struct JacobianEstimate {
  Matrix J;
  JacobianProvenance provenance = JacobianProvenance::finite_difference;
  double condition = 1.0;  // of the column-scaled matrix
  bool ill_conditioned = false;
};

/// Arclength context of an extended solve.
struct SecantContext {
  Vector secant, prediction, weights;
};

/// Forward differences, one rig evaluation per rig-driven unknown. With a
/// secant context the omega column is perturbed as well and the arclength
/// row is filled analytically.
JacobianEstimate fd_jacobian(const Vector& u, const Vector& phi, Rig& rig,
                             const SolveSettings& settings, const SecantContext* secant = nullptr);

/// J + ((dPhi - J du) / (du' W du)) (W du)'. W = I when `weights` is empty.
Matrix broyden_update(const Matrix& J, const Vector& du, const Vector& dphi,
                      const Vector& weights = Vector());

struct TraceEntry {
  int iteration = 0;
  Vector u, phi;
  double norm = 0.0;     // scaled 2-norm used by the line search
  double damping = 1.0;  // accepted m (0 when the line search bottomed out)
  bool accepted = true;
  bool fd_refresh = false;
};

struct BroydenRecord {
  Matrix J_new;
  Vector du, dphi;
};

struct NewtonResult {
  bool converged = false;
  Vector u, phi;
  SteadyState state;
  int iterations = 0;
  int evaluations = 0;
  int fd_jacobians = 0;
  bool ill_conditioned = false;
  std::vector<TraceEntry> trace;
  std::vector<BroydenRecord> broyden;
  Matrix J;
  std::string message;
};

/// Flowchart solver: evaluate, accept if within tolerance, else finite-
/// difference Jacobian, Newton steps with halving line search and Broyden
/// updates. Without a secant context omega stays fixed. A supplied
/// `jacobian` of matching size replaces the initial finite-difference
/// estimate (its arclength row is rebuilt from the secant).
NewtonResult newton_solve(const Vector& u0, Rig& rig, const SolveSettings& settings,
                          const SecantContext* secant = nullptr, bool use_broyden = true,
                          const Matrix* jacobian = nullptr);

/// max |Phi_k| over the interface rows against max(rel * |x3 fundamental|, abs).
bool within_tolerance(const Vector& phi, const SteadyState& state, const SolveSettings& settings);
double interface_error(const Vector& phi, int harmonics);

struct FrfPoint {
  double omega = 0.0;
  double amplitude = 0.0;  // x3 fundamental, m
  Vector u;
  FourierSignal x3, xi3;
  double residual_norm = 0.0;  // max-norm of the interface rows
  int iterations = 0;
  int evaluations = 0;
  bool fold_flag = false;
  double rms_ctrl = 0.0, rms_lc = 0.0;
};

struct FrfBranch {
  std::vector<FrfPoint> points;
  bool stalled = false;
  std::string message;
  int evaluations = 0;
  int failures = 0;

  std::size_t fold_count() const;
};

/// Pseudo-arclength continuation from omega_start towards omega_end (rad/s).
/// `initial` optionally seeds the first natural solve.
FrfBranch continue_frf(double omega_start, double omega_end, Rig& rig,
                       const SolveSettings& settings, const Vector* initial = nullptr,
                       const std::function<void(const FrfPoint&)>& on_point = {});

struct RefinedPoint {
  FrfPoint point;
  NewtonResult solve;
  /// Interface mismatch of harmonics 2..N before and after the refinement.
  double higher_before = 0.0, higher_after = 0.0;
  double fundamental_before = 0.0;
  SteadyState before, after;
};

/// Re-solve a converged fundamental-only point at fixed omega with
/// `settings.harmonics` harmonics in target and residual.
RefinedPoint match_higher_harmonics(const FrfPoint& point, Rig& rig, const SolveSettings& settings);

/// RMS distance of the mean-removed (x3, xi3) Lissajous curve from the
/// identity line over the measured window.
double lissajous_deviation(const SteadyState& state);

void write_branch_csv(const std::string& path, const FrfBranch& branch);
void write_histogram_csv(const std::string& path, const FrfBranch& branch);
void write_coefficients_json(const std::string& path, const FrfBranch& branch);

}  // namespace hybridlab
