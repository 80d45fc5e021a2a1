#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "hybridlab/stability.hpp"

namespace hybridlab {

namespace {

// Delayed equation written as y' = f(y, y(t - tau), y'(t - tau)).
class DelayedRhs {
 public:
  explicit DelayedRhs(const DelayedHybridModel& m) : m_(m), first_order_(m.is_first_order()) {
    const Matrix& lead = first_order_ ? m.C0 : m.M0;
    Eigen::FullPivLU<Matrix> lu(lead);
    require(lu.isInvertible(), first_order_ ? "simulate_dde needs an invertible C0"
                                            : "simulate_dde needs an invertible M0");
    inv_ = lu.inverse();
    l_ = m.dof();
  }

  Eigen::Index state_size() const { return first_order_ ? l_ : 2 * l_; }
  Eigen::Index dof() const { return l_; }

  Vector operator()(const Vector& y, const Vector& yd, const Vector& dyd) const {
    Vector out(state_size());
    if (first_order_) {
      out = inv_ * (-m_.K0 * y - m_.Kt * yd - m_.Ct * dyd);
      return out;
    }
    const auto q = y.head(l_);
    const auto v = y.tail(l_);
    out.head(l_) = v;
    out.tail(l_) = inv_ * (-m_.K0 * q - m_.C0 * v - m_.Kt * yd.head(l_) - m_.Ct * yd.tail(l_) -
                           m_.Mt * dyd.tail(l_));
    return out;
  }

 private:
  const DelayedHybridModel& m_;
  bool first_order_;
  Matrix inv_;
  Eigen::Index l_ = 0;
};

struct Sample {
  Vector y, dy;
};

}  // namespace

double default_dde_horizon(const DelayedHybridModel& model) {
  const Matrix M = model.M0 + model.Mt;
  const Matrix K = model.K0 + model.Kt;
  if (M.isZero(0.0)) {
    // first-order: use the slowest real decay time of C q' + K q = 0
    Eigen::EigenSolver<Matrix> es(Eigen::FullPivLU<Matrix>(model.C0 + model.Ct).inverse() * K,
                                  false);
    double slowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      slowest = std::min(slowest, std::abs(es.eigenvalues()(i)));
    return 100.0 * kTwoPi / std::max(slowest, 1e-12);
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(K, M);
  if (es.info() != Eigen::Success) throw SolverError("generalized eigensolver failed");
  const double w_min = std::sqrt(std::max(es.eigenvalues().minCoeff(), 1e-300));
  return 100.0 * kTwoPi / w_min;
}

DdeSimulation simulate_dde(const DelayedHybridModel& model, const Vector& q0, double horizon,
                           double step, const DdeSimulationSettings& settings) {
  model.validate();
  require(q0.size() == model.dof(), "initial displacement has the wrong size");
  require(std::isfinite(step) && step > 0.0, "step must be positive");
  require(std::isfinite(horizon) && horizon > 0.0, "horizon must be positive");
  require(model.tau > 0.0, "simulate_dde needs tau > 0");
  require(step <= model.tau * (1.0 + 1e-12), "step must not exceed the delay");

  const DelayedRhs rhs(model);
  const Eigen::Index s = rhs.state_size();
  const Eigen::Index l = rhs.dof();

  Vector y = Vector::Zero(s);
  y.head(l) = q0;
  const Vector hist_y = y;
  const Vector zero = Vector::Zero(s);

  // ring buffer with enough samples to reach t - tau - h
  const auto keep = static_cast<std::size_t>(std::ceil(model.tau / step)) + 3;
  std::deque<Sample> buf;
  std::size_t first_index = 0;  // grid index of buf.front()

  auto delayed = [&](double t_delayed, Vector& yd, Vector& dyd) {
    if (t_delayed < -1e-12 * step) {
      yd = hist_y;
      dyd = zero;
      return;
    }
    const double u = std::max(t_delayed, 0.0) / step;
    auto i = static_cast<std::size_t>(std::floor(u + 1e-9));
    double frac = u - static_cast<double>(i);
    if (frac < 1e-9) frac = 0.0;
    const std::size_t last = first_index + buf.size() - 1;
    if (i >= last) {
      i = last;
      frac = 0.0;
    }
    const Sample& a = buf[i - first_index];
    if (frac == 0.0) {
      yd = a.y;
      dyd = a.dy;
      return;
    }
    const Sample& b = buf[i + 1 - first_index];
    const double t = frac;
    const double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
    const double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
    yd = h00 * a.y + h10 * step * a.dy + h01 * b.y + h11 * step * b.dy;
    dyd = (1.0 - t) * a.dy + t * b.dy;
  };

  DdeSimulation out;
  out.initial_amplitude = q0.cwiseAbs().maxCoeff();
  const double amp_ref = std::max(out.initial_amplitude, 1e-300);
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));

  // envelope bookkeeping: max |q| over windows of 1/20 of the horizon
  constexpr int kWindows = 20;
  std::vector<double> envelope(kWindows, 0.0);

  Vector yd(s), dyd(s);
  auto record = [&](std::size_t n, double t) {
    if (settings.record_stride && n % settings.record_stride == 0) {
      out.times.push_back(t);
      out.displacements.push_back(y.head(l));
    }
  };

  double t = 0.0;
  for (std::size_t n = 0; n <= steps; ++n) {
    t = static_cast<double>(n) * step;
    delayed(t - model.tau, yd, dyd);
    Sample cur{y, Vector()};
    buf.push_back(std::move(cur));
    buf.back().dy = rhs(y, yd, dyd);
    while (buf.size() > keep) {
      buf.pop_front();
      ++first_index;
    }
    record(n, t);

    const double amp = y.head(l).cwiseAbs().maxCoeff();
    if (!std::isfinite(amp) || amp > settings.divergence_factor * amp_ref) {
      out.diverged = true;
      out.diverged_at = t;
      out.final_amplitude = amp;
      out.growth_rate = std::log(settings.divergence_factor) / std::max(t, step);
      return out;
    }
    const auto w = std::min<std::size_t>(kWindows - 1, static_cast<std::size_t>(t / horizon * kWindows));
    envelope[w] = std::max(envelope[w], amp);
    if (n == steps) break;

    // classical RK4 with delayed terms at the stage times
    const Vector& k1 = buf.back().dy;
    delayed(t + 0.5 * step - model.tau, yd, dyd);
    const Vector k2 = rhs(y + 0.5 * step * k1, yd, dyd);
    const Vector k3 = rhs(y + 0.5 * step * k2, yd, dyd);
    delayed(t + step - model.tau, yd, dyd);
    const Vector k4 = rhs(y + step * k3, yd, dyd);
    y += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  out.final_amplitude = envelope[kWindows - 1];
  const double mid = std::max(envelope[kWindows / 2], 1e-300);
  const double span = horizon * (kWindows - 1 - kWindows / 2) / kWindows;
  out.growth_rate = std::log(std::max(out.final_amplitude, 1e-300) / mid) / span;
  return out;
}

}  // namespace hybridlab
