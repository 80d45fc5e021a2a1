#include "hybridlab/fourier.hpp"

#include <cmath>

namespace hybridlab {

void FourierSignal::evaluate(double c1, double s1, double& x, double& dxdt) const {
  x = a0;
  double v = 0.0, ck = c1, sk = s1;
  for (int k = 1; k <= harmonics(); ++k) {
    x += a(k - 1) * ck + b(k - 1) * sk;
    v += k * (-a(k - 1) * sk + b(k - 1) * ck);
    const double cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
  }
  dxdt = omega * v;
}

double FourierSignal::value(double theta) const {
  double x, v;
  evaluate(std::cos(theta), std::sin(theta), x, v);
  return x;
}

double FourierSignal::rate(double theta) const {
  double x, v;
  evaluate(std::cos(theta), std::sin(theta), x, v);
  return v;
}

double FourierSignal::amplitude(int k) const {
  require(k >= 1 && k <= harmonics(), "harmonic index out of range");
  return std::hypot(a(k - 1), b(k - 1));
}

void FourierSignal::validate() const {
  require(harmonics() >= 1, "a Fourier signal needs at least one harmonic");
  require(a.size() == b.size(), "cosine and sine coefficient counts differ");
  require(std::isfinite(omega) && omega > 0.0, "Fourier signal frequency must be positive");
  require(std::isfinite(a0) && a.allFinite() && b.allFinite(), "Fourier coefficients must be finite");
}

std::size_t samples_for_periods(double h, double omega, int periods) {
  require(h > 0.0 && omega > 0.0 && periods >= 1, "invalid sampling window");
  return static_cast<std::size_t>(std::llround(periods * kTwoPi / omega / h));
}

FourierSignal extract_fourier(const std::vector<double>& samples, double h, double omega,
                              int harmonics, int periods, double phase0) {
  require(std::isfinite(h) && h > 0.0, "sample step must be positive");
  require(std::isfinite(omega) && omega > 0.0, "frequency must be positive");
  require(harmonics >= 1 && periods >= 1, "need at least one harmonic and one period");
  require(harmonics * omega * h < kPi, "highest harmonic is above the Nyquist frequency");
  const double window = periods * kTwoPi / omega;
  require(std::abs(static_cast<double>(samples.size()) * h - window) <= 0.5 * h + 1e-12 * window,
          "sample window does not span an integer number of periods");

  const int cols = 2 * harmonics + 1;
  Matrix normal = Matrix::Zero(cols, cols);
  Vector rhs = Vector::Zero(cols);
  Vector row(cols);
  const double dtheta = omega * h;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double theta = phase0 + dtheta * static_cast<double>(j);
    row(0) = 1.0;
    for (int k = 1; k <= harmonics; ++k) {
      row(2 * k - 1) = std::cos(k * theta);
      row(2 * k) = std::sin(k * theta);
    }
    normal.selfadjointView<Eigen::Lower>().rankUpdate(row);
    rhs += samples[j] * row;
  }
  const Vector c = normal.selfadjointView<Eigen::Lower>().ldlt().solve(rhs);
  require(c.allFinite(), "Fourier fit is singular");

  FourierSignal out(omega, harmonics);
  out.a0 = c(0);
  for (int k = 1; k <= harmonics; ++k) {
    out.a(k - 1) = c(2 * k - 1);
    out.b(k - 1) = c(2 * k);
  }
  return out;
}

}  // namespace hybridlab
