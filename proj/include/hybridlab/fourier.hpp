#pragma once

#include <vector>

#include "hybridlab/types.hpp"

namespace hybridlab {

/// x(theta) = a0 + sum_k a_k cos(k theta) + b_k sin(k theta), theta = omega t.
/// Index 0 of `a` and `b` holds harmonic 1.
struct FourierSignal {
  double omega = 0.0;  // rad/s
  double a0 = 0.0;
  Vector a, b;

  FourierSignal() = default;
  FourierSignal(double omega_, int harmonics)
      : omega(omega_), a(Vector::Zero(harmonics)), b(Vector::Zero(harmonics)) {}

  int harmonics() const { return static_cast<int>(a.size()); }
  double value(double theta) const;
  /// Time derivative dx/dt at phase theta.
  double rate(double theta) const;
  /// Value and rate from cos(theta), sin(theta); higher harmonics by the
  /// angle-addition recurrence.
  void evaluate(double c1, double s1, double& x, double& dxdt) const;
  /// sqrt(a_k^2 + b_k^2) for 1-based harmonic k.
  double amplitude(int k = 1) const;
  void validate() const;
};

/// Least-squares fit of a0, a_k, b_k (k = 1..harmonics) to samples taken every
/// `h` seconds starting at phase `phase0`. The window must cover `periods`
/// whole periods to within half a sample.
FourierSignal extract_fourier(const std::vector<double>& samples, double h, double omega,
                              int harmonics, int periods, double phase0 = 0.0);

/// Number of samples closest to `periods` periods at step h.
std::size_t samples_for_periods(double h, double omega, int periods);

}  // namespace hybridlab
