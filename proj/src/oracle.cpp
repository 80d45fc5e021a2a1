#include "hybridlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hybridlab {

ComplexFrf linear_frf(const StructuralMatrices& assembly, const Vector& forcing,
                      const std::vector<double>& omegas) {
  const auto l = assembly.dof();
  require(l >= 1 && forcing.size() == l, "forcing pattern must match the assembly size");
  ComplexFrf out;
  out.omegas = omegas;
  out.response.reserve(omegas.size());
  const ComplexVector f = forcing.cast<Complex>();
  for (double w : omegas) {
    require(std::isfinite(w) && w > 0.0, "FRF frequencies must be positive");
    const ComplexMatrix D = (-w * w) * assembly.M.cast<Complex>() +
                            Complex(0.0, w) * assembly.C.cast<Complex>() +
                            assembly.K.cast<Complex>();
    Eigen::FullPivLU<ComplexMatrix> lu(D);
    if (!lu.isInvertible()) {
      std::ostringstream msg;
      msg << "dynamic stiffness is singular at omega = " << w << " rad/s";
      throw SolverError(msg.str());
    }
    out.response.push_back(lu.solve(f));
  }
  return out;
}

ModalResult modal_analysis(const StructuralMatrices& assembly) {
  const auto l = assembly.dof();
  require(l >= 1, "empty assembly");
  Eigen::LLT<Matrix> llt(assembly.M);
  if (llt.info() != Eigen::Success) throw ValidationError("mass matrix must be positive definite");
  const Matrix Minv = llt.solve(Matrix::Identity(l, l));
  Matrix S = Matrix::Zero(2 * l, 2 * l);
  S.topRightCorner(l, l).setIdentity();
  S.bottomLeftCorner(l, l) = -Minv * assembly.K;
  S.bottomRightCorner(l, l) = -Minv * assembly.C;
  Eigen::EigenSolver<Matrix> es(S, false);
  if (es.info() != Eigen::Success) throw SolverError("modal eigensolver did not converge");

  std::vector<std::pair<double, double>> modes;  // (omega_n, zeta)
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Complex lam = es.eigenvalues()(i);
    if (lam.imag() <= 0.0) continue;  // one of each conjugate pair
    const double wn = std::abs(lam);
    modes.emplace_back(wn, -lam.real() / wn);
  }
  std::sort(modes.begin(), modes.end());
  ModalResult out;
  out.natural_frequencies.resize(static_cast<Eigen::Index>(modes.size()));
  out.damping_ratios.resize(static_cast<Eigen::Index>(modes.size()));
  for (std::size_t i = 0; i < modes.size(); ++i) {
    out.natural_frequencies(static_cast<Eigen::Index>(i)) = modes[i].first;
    out.damping_ratios(static_cast<Eigen::Index>(i)) = modes[i].second;
  }
  return out;
}

Vector undamped_frequencies(const StructuralMatrices& assembly) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(assembly.K, assembly.M);
  if (es.info() != Eigen::Success) throw SolverError("generalized eigensolver failed");
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

StructuralMatrices rig_true_assembly(const PlantConfig& plant, const NumSubConfig& numeric) {
  plant.validate();
  numeric.validate();
  StoreyChainSpec chain;
  for (const auto& s : plant.storeys) chain.storeys.push_back(s);
  chain.storeys[2].mass += numeric.mu3 - numeric.m3comp;
  chain.storeys.push_back({numeric.mu4, numeric.gamma4, numeric.sigma4});
  return assemble_true_assembly(chain);
}

FixedPoint linear_fixed_point(const PlantConfig& plant, const NumSubConfig& numeric,
                              const PhysicalGains& gains, double omega) {
  require(plant.mode == RestoringMode::linear, "fixed-point oracle needs the linear plant");
  require(std::isfinite(omega) && omega > 0.0, "frequency must be positive");
  const auto full = rig_true_assembly(plant, numeric);
  Vector f = Vector::Zero(4);
  f(3) = numeric.forcing;
  FixedPoint out;
  out.interface = linear_frf(full, f, {omega}).response[0](2);

  // force the shaker must supply so that the plant storey 3 moves with X3
  StoreyChainSpec chain;
  for (const auto& s : plant.storeys) chain.storeys.push_back(s);
  const auto phy = assemble_true_assembly(chain);
  const ComplexMatrix D = (-omega * omega) * phy.M.cast<Complex>() +
                          Complex(0.0, omega) * phy.C.cast<Complex>() + phy.K.cast<Complex>();
  const ComplexVector unit = D.fullPivLu().solve(ComplexVector::Unit(3, 2));
  out.interface_force = out.interface / unit(2);

  const Complex actuator = plant.shaker_gain * Complex(gains.kp, omega * gains.kd) /
                           Complex(1.0, omega * plant.actuator_lag);
  out.target = out.interface + out.interface_force / actuator;
  return out;
}

FourierSignal phasor_signal(Complex x, double omega) {
  FourierSignal s(omega, 1);
  s.a(0) = x.real();
  s.b(0) = -x.imag();
  return s;
}

namespace {

Eigen::Matrix4cd grounding_matrix(const NumSubConfig& cfg, bool grounded) {
  Eigen::Matrix4cd G = Eigen::Matrix4cd::Zero();
  if (grounded) {
    G(0, 0) = -cfg.kd_hat / cfg.mu3;
    G(0, 2) = -cfg.kp_hat / cfg.mu3;
  }
  return G;
}

}  // namespace

ComplexVector implicit_euler_transfer(const NumSubConfig& cfg, double omega, bool grounded) {
  const NumericalSubstructure sub(cfg);
  require(std::isfinite(omega) && omega >= 0.0, "frequency must be non-negative");
  require(omega * cfg.h < kPi, "frequency above the Nyquist limit of the time step");
  const Eigen::Matrix4cd R = sub.resolvent().cast<Complex>();
  const Eigen::Matrix4cd I = Eigen::Matrix4cd::Identity();
  const Eigen::Vector4cd B = sub.input(0.0, cfg.forcing).cast<Complex>();
  const Complex shift = std::exp(Complex(0.0, omega * cfg.h));
  const Eigen::Matrix4cd lhs = shift * I - R * (I + cfg.h * grounding_matrix(cfg, grounded));
  Eigen::FullPivLU<Eigen::Matrix4cd> lu(lhs);
  if (!lu.isInvertible()) throw SolverError("implicit-Euler map has a unit-circle pole at omega");
  return lu.solve(R * (cfg.h * B));
}

ComplexVector continuous_transfer(const NumSubConfig& cfg, double omega, bool grounded) {
  const NumericalSubstructure sub(cfg);
  const Eigen::Matrix4cd lhs = Complex(0.0, omega) * Eigen::Matrix4cd::Identity() -
                               sub.A().cast<Complex>() - grounding_matrix(cfg, grounded);
  Eigen::FullPivLU<Eigen::Matrix4cd> lu(lhs);
  if (!lu.isInvertible()) throw SolverError("continuous transfer has a pole at omega");
  return lu.solve(sub.input(0.0, cfg.forcing).cast<Complex>());
}

namespace {

// Monolithic four-storey assembly with the plant's restoring law.
struct Monolithic {
  std::array<double, 4> m{}, c{}, k{};
  const PlantConfig& plant;
  double forcing;

  Monolithic(const PlantConfig& p, const NumSubConfig& n) : plant(p), forcing(n.forcing) {
    for (int r = 0; r < 3; ++r) {
      m[r] = p.storeys[r].mass;
      c[r] = p.storeys[r].damping;
      k[r] = p.storeys[r].stiffness;
    }
    m[2] += n.mu3 - n.m3comp;
    m[3] = n.mu4;
    c[3] = n.gamma4;
    k[3] = n.sigma4;
  }

  using State = std::array<double, 8>;  // x1..x4, v1..v4

  State rate(const State& s, double f4) const {
    std::array<double, 4> leg{};
    for (int r = 0; r < 4; ++r) {
      const double dx = s[r] - (r ? s[r - 1] : 0.0);
      const double dv = s[4 + r] - (r ? s[3 + r] : 0.0);
      const double spring = r == 2 ? restoring_force(dx, plant.mode, k[r], plant.bilinear) : k[r] * dx;
      leg[r] = c[r] * dv + spring;
    }
    State d{};
    for (int r = 0; r < 4; ++r) {
      d[r] = s[4 + r];
      const double above = r < 3 ? leg[r + 1] : 0.0;
      double f = above - leg[r];
      if (r == 2) f += plant.preload;
      if (r == 3) f += f4;
      d[4 + r] = f / m[r];
    }
    return d;
  }

  // RK4 with the forcing evaluated at the stage times
  State step(const State& s, double theta, double dtheta, double h) const {
    auto add = [](const State& a, const State& b, double w) {
      State o;
      for (int i = 0; i < 8; ++i) o[i] = a[i] + w * b[i];
      return o;
    };
    const State k1 = rate(s, forcing * std::cos(theta));
    const State k2 = rate(add(s, k1, 0.5 * h), forcing * std::cos(theta + 0.5 * dtheta));
    const State k3 = rate(add(s, k2, 0.5 * h), forcing * std::cos(theta + 0.5 * dtheta));
    const State k4 = rate(add(s, k3, h), forcing * std::cos(theta + dtheta));
    State o;
    for (int i = 0; i < 8; ++i) o[i] = s[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return o;
  }
};

}  // namespace

SweepResult nonlinear_sweep_frf(const PlantConfig& plant, const NumSubConfig& numeric,
                                std::vector<double> omegas, SweepDirection direction,
                                const SweepSettings& settings) {
  plant.validate();
  numeric.validate();
  require(!omegas.empty(), "sweep needs at least one frequency");
  require(settings.settle_periods >= 1 && settings.measure_periods >= 2,
          "need at least one settle period and two measured periods");
  for (double w : omegas) require(std::isfinite(w) && w > 0.0, "sweep frequencies must be positive");
  std::sort(omegas.begin(), omegas.end());
  if (direction == SweepDirection::down) std::reverse(omegas.begin(), omegas.end());

  const Monolithic sys(plant, numeric);
  const double h = numeric.h;
  Monolithic::State s{};
  // start from the static equilibrium under the preload; the top leg is unloaded
  const PlantState rest = static_equilibrium(plant);
  for (int r = 0; r < 3; ++r) s[r] = rest.x[r];
  s[3] = rest.x[2];

  SweepResult out;
  out.direction = direction;
  double theta = 0.0;
  for (double w : omegas) {
    const double dtheta = w * h;
    auto advance = [&](std::size_t n, std::vector<double>* rec) {
      for (std::size_t i = 0; i < n; ++i) {
        if (rec) (*rec)[i] = s[2];
        s = sys.step(s, theta, dtheta, h);
        theta += dtheta;
        if (theta >= kTwoPi) theta -= kTwoPi;
      }
      for (double v : s)
        if (!std::isfinite(v)) throw RigError("monolithic sweep trajectory became non-finite");
    };
    advance(samples_for_periods(h, w, settings.settle_periods), nullptr);

    const std::size_t n = samples_for_periods(h, w, settings.measure_periods);
    const std::size_t per = samples_for_periods(h, w, 1);
    std::vector<double> rec(n);
    FourierSignal x3;
    for (int window = 0;; ++window) {
      const double phase0 = theta;
      advance(n, &rec);
      auto fundamental = [&](std::size_t end) {
        const std::vector<double> seg(rec.begin() + static_cast<long>(end - per),
                                      rec.begin() + static_cast<long>(end));
        const auto f = extract_fourier(seg, h, w, 1, 1, phase0 + w * h * static_cast<double>(end - per));
        return Complex(f.a(0), f.b(0));
      };
      const Complex last = fundamental(n), prev = fundamental(n - per);
      const bool steady = std::abs(last - prev) <= settings.steady_tolerance * std::abs(last) + 1e-12;
      if (steady || window >= settings.max_extra_windows) {
        x3 = extract_fourier(rec, h, w, 3, settings.measure_periods, phase0);
        break;
      }
    }
    out.points.push_back({w, x3.amplitude(1), x3});
  }

  for (std::size_t i = 1; i < out.points.size(); ++i) {
    const double a = out.points[i - 1].amplitude, b = out.points[i].amplitude;
    const double ratio = std::max(a, b) / std::max(std::min(a, b), 1e-300);
    if (ratio > out.jump_ratio) {
      out.jump_ratio = ratio;
      out.jump_from = out.points[i - 1].omega;
      out.jump_to = out.points[i].omega;
    }
  }
  return out;
}

void write_frf_csv(const std::string& path, const ComplexFrf& frf, Eigen::Index coordinate) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(12) << "omega_rad_s,f_Hz,A3_m,phase_rad\n";
  for (std::size_t i = 0; i < frf.omegas.size(); ++i) {
    const Complex x = frf.response[i](coordinate);
    out << frf.omegas[i] << ',' << frf.omegas[i] / kTwoPi << ',' << std::abs(x) << ','
        << std::arg(x) << '\n';
  }
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(12) << "omega_rad_s,f_Hz,A3_m,direction\n";
  for (const auto& p : sweep.points) {
    out << p.omega << ',' << p.omega / kTwoPi << ',' << p.amplitude << ','
        << (sweep.direction == SweepDirection::up ? "up" : "down") << '\n';
  }
}

}  // namespace hybridlab
