#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hybridlab/model.hpp"
#include "hybridlab/types.hpp"

namespace hybridlab {

// ---------------------------------------------------------------------------
// Characteristic function

/// D(lambda) = det(lambda^2 (Mt e^{-lambda tau} + M0) + lambda (Ct e^{-lambda tau} + C0)
///                 + Kt e^{-lambda tau} + K0).
Complex char_fn(const DelayedHybridModel& model, Complex lambda);

/// D(0) = det(K0 + Kt); zero marks a static stability boundary.
double static_boundary_value(const DelayedHybridModel& model);

/// |D(i omega)| divided by a Hadamard bound built from the entry magnitudes of
/// the individual terms; lies in [0, 1] and is zero exactly on a boundary.
double normalized_char_residual(const DelayedHybridModel& model, double omega);

// ---------------------------------------------------------------------------
// Oscillatory boundaries (multi-dimensional bisection)

struct BoundaryPoint {
  double tau = 0.0;    // s
  double p = 0.0;      // mass ratio
  double omega = 0.0;  // rad/s
};

struct BoundaryCurve {
  std::vector<BoundaryPoint> points;
};

struct SearchBox {
  double tau_min = 5e-5, tau_max = 30e-5;
  double p_min = 0.01, p_max = 1.0;
  double omega_min = 1e-4, omega_max = 550.0;
};

struct BisectionSettings {
  int seed_tau = 40, seed_p = 40, seed_omega = 60;
  int depth = 6;
  /// Points whose normalized |D(i omega)| exceeds this after polishing are dropped.
  double tolerance = 1e-8;
};

/// Zero set of (Re D(i omega), Im D(i omega)) inside `box`, grouped into
/// connected curves. Seed-grid sampling, recursive octant bisection of cells
/// whose corners bracket both equations, then Newton polishing in (p, omega)
/// at fixed tau.
std::vector<BoundaryCurve> find_oscillatory_boundaries(const HybridFamily& family,
                                                       const SearchBox& box,
                                                       const BisectionSettings& settings = {});

// ---------------------------------------------------------------------------
// Semi-discretization

/// Chebyshev collocation of the delayed state over [-tau, 0] with `nodes`
/// points (theta_0 = 0, theta_{nodes-1} = -tau). Second-order models use the
/// state (q, q'); the delayed acceleration is the derivative of the velocity
/// interpolant at -tau. Models without inertia are collocated as first-order
/// delay equations in q with C0 as leading matrix.
Matrix semidiscretize(const DelayedHybridModel& model, int nodes = 32);

/// Eigenvalue with the largest real part (ties: larger imaginary part, then
/// lower index).
Complex rightmost_eigenvalue(const Matrix& A);

enum class CellLabel { stabilisable, unstable, failed };

std::string to_string(CellLabel label);

struct StabilityCell {
  double tau = 0.0;
  double p = 0.0;
  double rightmost_re = 0.0;
  CellLabel label = CellLabel::failed;
  std::string error;
};

struct StabilityGrid {
  std::vector<double> taus;
  std::vector<double> ps;
  std::vector<StabilityCell> cells;  // row-major: tau index outer, p index inner

  const StabilityCell& at(std::size_t tau_index, std::size_t p_index) const {
    return cells[tau_index * ps.size() + p_index];
  }
};

StabilityGrid stability_chart(const HybridFamily& family, const std::vector<double>& taus,
                              const std::vector<double>& ps, int nodes = 32);

/// `cells` midpoints of `cells` equal subintervals of [lo, hi].
std::vector<double> cell_centres(double lo, double hi, std::size_t cells);

/// Root in (0, 1) of det(M0(p) - Mt(p)), the small-delay limit of the
/// neutral spectrum. Throws SolverError when there is no sign change.
double asymptotic_boundary(const HybridFamily& family);

/// Real part of the accumulation line of the neutral spectrum,
/// max |root| of det(M0 + Mt z) = 0 mapped to ln|z| / tau. Returns -inf when
/// Mt is zero.
double neutral_spectrum_abscissa(const DelayedHybridModel& model);

// ---------------------------------------------------------------------------
// Time-domain validation

struct DdeSimulationSettings {
  double divergence_factor = 1e6;
  /// Keep every `record_stride`-th sample of the trajectory (0 = none).
  std::size_t record_stride = 0;
};

struct DdeSimulation {
  std::vector<double> times;
  std::vector<Vector> displacements;
  bool diverged = false;
  double diverged_at = 0.0;
  /// Exponential rate of the displacement envelope over the second half of
  /// the run (1/s); positive means growing.
  double growth_rate = 0.0;
  double initial_amplitude = 0.0;
  double final_amplitude = 0.0;
};

/// Fixed-step RK4 integration of the delayed model from the constant history
/// q(theta) = q0, q'(theta) = 0. Delayed state, velocity and acceleration are
/// read from the stored trajectory by cubic Hermite interpolation.
DdeSimulation simulate_dde(const DelayedHybridModel& model, const Vector& q0, double horizon,
                           double step, const DdeSimulationSettings& settings = {});

/// 100 x the longest undamped period of the assembled model (M0 + Mt, K0 + Kt).
double default_dde_horizon(const DelayedHybridModel& model);

}  // namespace hybridlab
