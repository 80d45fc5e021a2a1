#pragma once

#include <string>
#include <vector>

#include "hybridlab/fourier.hpp"
#include "hybridlab/model.hpp"
#include "hybridlab/rig.hpp"
#include "hybridlab/types.hpp"

namespace hybridlab {

/// Complex amplitudes X solving (-omega^2 M + i omega C + K) X = F.
struct ComplexFrf {
  std::vector<double> omegas;
  std::vector<ComplexVector> response;
};

ComplexFrf linear_frf(const StructuralMatrices& assembly, const Vector& forcing,
                      const std::vector<double>& omegas);

struct ModalResult {
  Vector natural_frequencies;  // rad/s, ascending
  Vector damping_ratios;
};

/// Eigen-solution of the damped second-order pencil via its first-order form.
ModalResult modal_analysis(const StructuralMatrices& assembly);

/// Undamped frequencies (rad/s) from the generalized symmetric problem K v = w^2 M v.
Vector undamped_frequencies(const StructuralMatrices& assembly);

/// Four-storey assembly the rig emulates: plant storeys 1-3 (the interface
/// floor mass corrected by mu3 - m3comp) and the numerical top storey.
StructuralMatrices rig_true_assembly(const PlantConfig& plant, const NumSubConfig& numeric);

/// Steady complex amplitude of z = (xi3', xi4', xi3, xi4) per unit forcing
/// phasor for the implicit-Euler map driven by Phi_f cos(omega t_i) on xi4,
/// with the interface at rest and the grounding control closed
/// (`grounded`) or open.
ComplexVector implicit_euler_transfer(const NumSubConfig& cfg, double omega, bool grounded = true);

/// Continuous-time counterpart of implicit_euler_transfer.
ComplexVector continuous_transfer(const NumSubConfig& cfg, double omega, bool grounded = true);

/// Interface response of the emulated assembly and the shaker target that
/// reproduces it on the linear plant (continuous-time phasors,
/// x(t) = Re(X e^{i omega t})).
struct FixedPoint {
  Complex interface;  // X3 of the true assembly
  Complex target;     // x* with x3 = xi3 = X3
  Complex interface_force;
};

FixedPoint linear_fixed_point(const PlantConfig& plant, const NumSubConfig& numeric,
                              const PhysicalGains& gains, double omega);

/// Fourier form (a = Re X, b = -Im X) of a phasor.
FourierSignal phasor_signal(Complex x, double omega);

enum class SweepDirection { up, down };

struct SweepSettings {
  int settle_periods = 400;
  int measure_periods = 4;
  double steady_tolerance = 5e-4;
  int max_extra_windows = 50;
};

struct SweepPoint {
  double omega = 0.0;
  double amplitude = 0.0;  // storey-3 fundamental, m
  FourierSignal x3;
};

struct SweepResult {
  SweepDirection direction = SweepDirection::up;
  std::vector<SweepPoint> points;  // in sweep order
  /// Neighbouring grid frequencies across the largest amplitude jump.
  double jump_from = 0.0, jump_to = 0.0;
  double jump_ratio = 1.0;  // max/min amplitude across that step
};

/// Stepped-sine sweep of the monolithic four-storey assembly (no
/// substructuring, no control) with the plant's restoring law and preload,
/// integrated by RK4 with step h and state carried from one frequency to the
/// next. `omegas` is sorted in the sweep direction internally.
SweepResult nonlinear_sweep_frf(const PlantConfig& plant, const NumSubConfig& numeric,
                                std::vector<double> omegas, SweepDirection direction,
                                const SweepSettings& settings = {});

void write_frf_csv(const std::string& path, const ComplexFrf& frf, Eigen::Index coordinate);
void write_sweep_csv(const std::string& path, const SweepResult& sweep);

}  // namespace hybridlab
