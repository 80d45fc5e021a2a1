#include "hybridlab/rig.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hybridlab {

std::string to_string(RestoringMode mode) {
  return mode == RestoringMode::linear ? "linear" : "bilinear";
}

RestoringMode restoring_mode_from_string(const std::string& name) {
  if (name == "linear") return RestoringMode::linear;
  if (name == "bilinear") return RestoringMode::bilinear;
  throw ValidationError("unknown restoring force mode '" + name + "'");
}

BilinearLaw BilinearLaw::through_origin(double k_minus, double k_plus, double x_break) {
  BilinearLaw law;
  law.k_minus = k_minus;
  law.c_minus = 0.0;
  law.k_plus = k_plus;
  law.c_plus = (k_minus - k_plus) * x_break;
  law.x_break = x_break;
  return law;
}

BilinearLaw BilinearLaw::softening_below(double preload, double k_plus, double ratio, double gap) {
  require(preload > 0.0 && k_plus > 0.0 && ratio > 0.0 && gap >= 0.0,
          "softening law needs positive preload, stiffness and ratio");
  const double k_minus = ratio * k_plus;
  const double x_break = (preload - k_plus * gap) / k_minus;
  require(x_break > 0.0, "gap exceeds the preloaded deflection");
  return through_origin(k_minus, k_plus, x_break);
}

void BilinearLaw::validate() const {
  require(std::isfinite(k_minus) && k_minus > 0.0 && std::isfinite(k_plus) && k_plus > 0.0,
          "bilinear slopes must be positive");
  require(std::isfinite(c_minus) && std::isfinite(c_plus) && std::isfinite(x_break),
          "bilinear parameters must be finite");
  const double left = k_minus * x_break + c_minus;
  const double right = k_plus * x_break + c_plus;
  const double scale = std::max({std::abs(left), std::abs(right),
                                 std::max(k_minus, k_plus) * std::max(std::abs(x_break), 1e-6)});
  require(std::abs(left - right) <= 1e-9 * scale, "bilinear force must be continuous at the break");
}

double restoring_force(double dx, RestoringMode mode, double k_linear, const BilinearLaw& law) {
  if (mode == RestoringMode::linear) return k_linear * dx;
  return dx < law.x_break ? law.k_minus * dx + law.c_minus : law.k_plus * dx + law.c_plus;
}

PlantConfig PlantConfig::reference() {
  PlantConfig cfg;
  const auto chain = reference_building(4);
  for (std::size_t r = 0; r < 3; ++r) cfg.storeys[r] = chain.storeys[r];
  cfg.bilinear = BilinearLaw::through_origin(cfg.storeys[2].stiffness, cfg.storeys[2].stiffness, 0.0);
  return cfg;
}

PlantConfig PlantConfig::reference_bilinear() {
  PlantConfig cfg = reference();
  cfg.mode = RestoringMode::bilinear;
  cfg.preload = 26.68;
  // Nominal stiffness above the break, a softer contact-free slope below it,
  // with the break 0.1 mm under the preloaded operating point so resonant
  // oscillations spend part of each cycle on the soft side.
  cfg.bilinear = BilinearLaw::softening_below(cfg.preload, cfg.storeys[2].stiffness, 0.7, 1e-4);
  return cfg;
}

void PlantConfig::validate() const {
  for (const auto& s : storeys) s.validate();
  require(std::isfinite(shaker_gain) && shaker_gain > 0.0, "shaker gain must be positive");
  require(std::isfinite(actuator_lag) && actuator_lag >= 0.0, "actuator lag must be non-negative");
  require(std::isfinite(displacement_noise) && displacement_noise >= 0.0 &&
              std::isfinite(force_noise) && force_noise >= 0.0,
          "noise amplitudes must be non-negative");
  require(std::isfinite(preload), "preload must be finite");
  if (mode == RestoringMode::bilinear) bilinear.validate();
}

NumSubConfig NumSubConfig::reference(double mass_ratio) {
  require(std::isfinite(mass_ratio) && mass_ratio > 0.0 && mass_ratio < 1.0,
          "mass ratio must lie in (0, 1)");
  NumSubConfig cfg;
  cfg.mu3 = mass_ratio * kReferenceInterfaceMass;
  cfg.m3comp = cfg.mu3;
  return cfg;
}

void NumSubConfig::validate() const {
  require(std::isfinite(mu3) && mu3 > 0.0 && std::isfinite(mu4) && mu4 > 0.0,
          "numerical masses must be positive");
  require(std::isfinite(gamma4) && gamma4 >= 0.0 && std::isfinite(sigma4) && sigma4 >= 0.0,
          "numerical leg parameters must be non-negative");
  require(std::isfinite(h) && h > 0.0, "time step must be positive");
  require(std::isfinite(kp_hat) && kp_hat >= 0.0 && std::isfinite(kd_hat) && kd_hat >= 0.0,
          "numerical control gains must be non-negative");
  require(std::isfinite(forcing) && std::isfinite(m3comp) && m3comp >= 0.0,
          "forcing and compensation mass must be finite");
}

void ControlTarget::validate() const {
  target.validate();
  require(target.a0 == 0.0, "control target must have zero mean");
  require(std::isfinite(gains.kp) && std::isfinite(gains.kd), "control gains must be finite");
}

double shaker_demand_at_phase(const ControlTarget& target, double x3, double v3, double theta) {
  return shaker_demand_cs(target, x3, v3, std::cos(theta), std::sin(theta));
}

double shaker_demand_cs(const ControlTarget& target, double x3, double v3, double c1, double s1) {
  double x, v;
  target.target.evaluate(c1, s1, x, v);
  return target.gains.kp * (x - x3) + target.gains.kd * (v - v3);
}

double shaker_demand(const ControlTarget& target, double x3, double v3, double t) {
  return shaker_demand_at_phase(target, x3, v3, target.target.omega * t);
}

double numerical_grounding_force(double x3, double v3, double xi3, double xi3_dot, double kp_hat,
                                 double kd_hat) {
  return kp_hat * (x3 - xi3) + kd_hat * (v3 - xi3_dot);
}

double shaker_force(const PlantConfig& cfg, const PlantState& s, double U) {
  return cfg.shaker_gain * (cfg.actuator_lag > 0.0 ? s.lag : U) + cfg.preload;
}

std::array<double, 3> plant_acceleration(const PlantConfig& cfg, const PlantState& s,
                                         double force) {
  const auto& st = cfg.storeys;
  const double f1 = st[0].damping * s.v[0] + st[0].stiffness * s.x[0];
  const double f2 = st[1].damping * (s.v[1] - s.v[0]) + st[1].stiffness * (s.x[1] - s.x[0]);
  const double f3 = st[2].damping * (s.v[2] - s.v[1]) +
                    restoring_force(s.x[2] - s.x[1], cfg.mode, st[2].stiffness, cfg.bilinear);
  return {(f2 - f1) / st[0].mass, (f3 - f2) / st[1].mass, (force - f3) / st[2].mass};
}

namespace {

struct PlantRate {
  std::array<double, 3> dx, dv;
  double dlag;
};

PlantRate plant_rate(const PlantConfig& cfg, const PlantState& s, double U) {
  PlantRate r;
  r.dx = s.v;
  r.dv = plant_acceleration(cfg, s, shaker_force(cfg, s, U));
  r.dlag = cfg.actuator_lag > 0.0 ? (U - s.lag) / cfg.actuator_lag : 0.0;
  return r;
}

PlantState shifted(const PlantState& s, const PlantRate& r, double dt) {
  PlantState o;
  for (int i = 0; i < 3; ++i) {
    o.x[i] = s.x[i] + dt * r.dx[i];
    o.v[i] = s.v[i] + dt * r.dv[i];
  }
  o.lag = s.lag + dt * r.dlag;
  return o;
}

}  // namespace

PlantState step_physical(const PlantConfig& cfg, const PlantState& s, double U, double dt) {
  const PlantRate k1 = plant_rate(cfg, s, U);
  const PlantRate k2 = plant_rate(cfg, shifted(s, k1, 0.5 * dt), U);
  const PlantRate k3 = plant_rate(cfg, shifted(s, k2, 0.5 * dt), U);
  const PlantRate k4 = plant_rate(cfg, shifted(s, k3, dt), U);
  PlantState o;
  bool finite = true;
  for (int i = 0; i < 3; ++i) {
    o.x[i] = s.x[i] + dt / 6.0 * (k1.dx[i] + 2 * k2.dx[i] + 2 * k3.dx[i] + k4.dx[i]);
    o.v[i] = s.v[i] + dt / 6.0 * (k1.dv[i] + 2 * k2.dv[i] + 2 * k3.dv[i] + k4.dv[i]);
    finite = finite && std::isfinite(o.x[i]) && std::isfinite(o.v[i]);
  }
  o.lag = s.lag + dt / 6.0 * (k1.dlag + 2 * k2.dlag + 2 * k3.dlag + k4.dlag);
  if (!finite || !std::isfinite(o.lag)) {
    std::ostringstream msg;
    msg << "physical substructure state became non-finite (U = " << U << ")";
    throw RigError(msg.str());
  }
  return o;
}

PlantState static_equilibrium(const PlantConfig& cfg) {
  PlantState s;
  const double p = cfg.preload;
  if (p == 0.0) return s;
  const auto& st = cfg.storeys;
  double d3 = p / st[2].stiffness;
  if (cfg.mode == RestoringMode::bilinear) {
    const auto& law = cfg.bilinear;
    d3 = (p - law.c_plus) / law.k_plus;
    if (d3 < law.x_break) d3 = (p - law.c_minus) / law.k_minus;
  }
  s.x[0] = p / st[0].stiffness;
  s.x[1] = s.x[0] + p / st[1].stiffness;
  s.x[2] = s.x[1] + d3;
  s.lag = 0.0;
  return s;
}

double plant_energy(const PlantConfig& cfg, const PlantState& s) {
  const auto& st = cfg.storeys;
  double e = 0.0;
  for (int i = 0; i < 3; ++i) e += 0.5 * st[i].mass * s.v[i] * s.v[i];
  e += 0.5 * st[0].stiffness * s.x[0] * s.x[0];
  e += 0.5 * st[1].stiffness * (s.x[1] - s.x[0]) * (s.x[1] - s.x[0]);
  e += 0.5 * st[2].stiffness * (s.x[2] - s.x[1]) * (s.x[2] - s.x[1]);
  return e;
}

NumericalSubstructure::NumericalSubstructure(const NumSubConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const double g = cfg.gamma4, s = cfg.sigma4;
  A_.setZero();
  A_(0, 0) = -g / cfg.mu3;
  A_(0, 1) = g / cfg.mu3;
  A_(0, 2) = -s / cfg.mu3;
  A_(0, 3) = s / cfg.mu3;
  A_(1, 0) = g / cfg.mu4;
  A_(1, 1) = -g / cfg.mu4;
  A_(1, 2) = s / cfg.mu4;
  A_(1, 3) = -s / cfg.mu4;
  A_(2, 0) = 1.0;
  A_(3, 1) = 1.0;
  const Eigen::Matrix4d lhs = Eigen::Matrix4d::Identity() - cfg.h * A_;
  Eigen::FullPivLU<Eigen::Matrix4d> lu(lhs);
  require(lu.isInvertible(), "implicit Euler matrix I - hA is singular");
  R_ = lu.inverse();
}

NumState NumericalSubstructure::input(double f_num, double f_forc) const {
  return {f_num / cfg_.mu3, f_forc / cfg_.mu4, 0.0, 0.0};
}

NumState NumericalSubstructure::step(const NumState& z, double f_num, double f_forc) const {
  return R_ * (z + cfg_.h * input(f_num, f_forc));
}

NumState step_numeric(const NumericalSubstructure& sub, const NumState& z, double f_lc,
                      double f_ctrl, double f_forc, double f_comp) {
  return sub.step(z, f_comp - f_lc + f_ctrl, f_forc);
}

void RigConfig::validate() const {
  plant.validate();
  numeric.validate();
  require(settle_periods >= 1 && measure_periods >= 2,
          "need at least one settle period and two measured periods");
  require(steady_tolerance > 0.0 && steady_floor >= 0.0 && max_extra_windows >= 0,
          "invalid steady-state settings");
}

Rig::Rig(RigConfig cfg) : cfg_(std::move(cfg)), num_(cfg_.numeric), rng_(cfg_.plant.seed) {
  cfg_.validate();
  reset();
}

void Rig::reset() {
  rest();
  t_ = theta_ = 0.0;
  rng_.seed(cfg_.plant.seed);
  gauss_.reset();
  samples_.clear();
  evaluations_ = steps_ = 0;
}

void Rig::rest() {
  plant_ = static_equilibrium(cfg_.plant);
  offset_ = plant_.x[2];
  // the grounding spring carries the preload reaction on the numerical side
  const double kp = cfg_.numeric.kp_hat;
  const double xi = offset_ - (kp > 0.0 ? cfg_.plant.preload / kp : 0.0);
  z_ << 0.0, 0.0, xi, xi;
}

Rig::Readings Rig::advance(const ControlTarget& target, double omega) {
  const auto& pc = cfg_.plant;
  const auto& nc = cfg_.numeric;
  const double h = nc.h;

  double x3 = plant_.x[2];
  double dn = 0.0, fn = 0.0;
  if (pc.displacement_noise > 0.0) dn = pc.displacement_noise * gauss_(rng_);
  if (pc.force_noise > 0.0) fn = pc.force_noise * gauss_(rng_);
  x3 += dn;
  const double v3 = plant_.v[2];

  const double c1 = std::cos(theta_), s1 = std::sin(theta_);
  const double U = shaker_demand_cs(target, x3 - offset_, v3, c1, s1);
  const double f_sh = shaker_force(pc, plant_, U);
  const double a3 = plant_acceleration(pc, plant_, f_sh)[2];
  const double f_lc = f_sh + fn;
  const double f_ctrl = numerical_grounding_force(x3, v3, z_(2), z_(0), nc.kp_hat, nc.kd_hat);
  const double f_comp = nc.m3comp * a3;
  const double f_forc = nc.forcing * c1;

  const Readings out{x3, f_lc, f_ctrl, U};
  if (record_stride_ && steps_ % record_stride_ == 0) {
    samples_.push_back({t_, plant_.x, z_(2), z_(3), f_lc, f_ctrl, U});
  }

  z_ = step_numeric(num_, z_, f_lc, f_ctrl, f_forc, f_comp);
  if (!z_.allFinite()) throw RigError("numerical substructure state became non-finite");
  plant_ = step_physical(pc, plant_, U, h);

  t_ += h;
  theta_ += omega * h;
  if (theta_ >= kTwoPi) theta_ -= kTwoPi;
  ++steps_;
  return out;
}

SteadyState Rig::run_to_steady_state(const ControlTarget& target, double omega, int harmonics) {
  return run_to_steady_state(target, omega, harmonics, cfg_.settle_periods, cfg_.measure_periods);
}

SteadyState Rig::run_to_steady_state(const ControlTarget& target, double omega, int harmonics,
                                     int settle_periods, int measure_periods) {
  target.validate();
  require(std::isfinite(omega) && omega > 0.0, "forcing frequency must be positive");
  require(std::abs(target.target.omega - omega) <= 1e-12 * omega,
          "control target frequency differs from the forcing frequency");
  require(settle_periods >= 1 && measure_periods >= 2,
          "need at least one settle period and two measured periods");
  const int n_harm = std::max(harmonics, target.target.harmonics());
  const double h = cfg_.numeric.h;
  require(n_harm * omega * h < kPi, "harmonics above the Nyquist frequency");
  ++evaluations_;

  // only the measured windows are recorded
  const std::size_t stride = record_stride_;
  record_stride_ = 0;
  const std::size_t settle = samples_for_periods(h, omega, settle_periods);
  try {
    for (std::size_t i = 0; i < settle; ++i) advance(target, omega);
  } catch (const RigError&) {
    // a blown-up rig is useless to the caller; put it back at rest
    record_stride_ = stride;
    rest();
    throw;
  }
  record_stride_ = stride;

  const std::size_t n = samples_for_periods(h, omega, measure_periods);
  const std::size_t per = samples_for_periods(h, omega, 1);
  const double noise = std::max(cfg_.plant.displacement_noise, 0.0);
  const double floor = cfg_.steady_floor + 6.0 * noise * std::sqrt(2.0 / static_cast<double>(per));

  std::vector<double> xs(n), xis(n), fc(n), fl(n);
  SteadyState out;
  out.omega = omega;
  for (int window = 0;; ++window) {
    if (stride) samples_.clear();
    const double phase0 = theta_;
    for (std::size_t j = 0; j < n; ++j) {
      const double xi3 = z_(2);
      const Readings r = advance(target, omega);
      xs[j] = r.x3;
      xis[j] = xi3;
      fc[j] = r.f_ctrl;
      fl[j] = r.f_lc;
    }

    // fundamentals of the last two single periods
    auto fundamental = [&](const std::vector<double>& v, std::size_t end) {
      const std::vector<double> seg(v.begin() + static_cast<long>(end - per),
                                    v.begin() + static_cast<long>(end));
      const double ph = phase0 + omega * h * static_cast<double>(end - per);
      const auto f = extract_fourier(seg, h, omega, 1, 1, ph);
      return Complex(f.a(0), f.b(0));
    };
    bool steady = true;
    for (const auto* v : {&xs, &xis}) {
      const Complex last = fundamental(*v, n);
      const Complex prev = fundamental(*v, n - per);
      if (std::abs(last - prev) > cfg_.steady_tolerance * std::abs(last) + floor) steady = false;
    }

    if (steady || window >= cfg_.max_extra_windows) {
      if (!steady) {
        const Complex last = fundamental(xs, n);
        const Complex prev = fundamental(xs, n - per);
        std::ostringstream msg;
        msg << std::setprecision(6) << "rig did not reach steady state at omega = " << omega
            << " rad/s after " << window + 1 << " measurement windows (last x3 fundamental "
            << std::abs(last) << " m, change " << std::abs(last - prev) << " m)";
        throw RigError(msg.str());
      }
      out.extra_windows = window;
      out.x3 = extract_fourier(xs, h, omega, n_harm, measure_periods, phase0);
      out.xi3 = extract_fourier(xis, h, omega, n_harm, measure_periods, phase0);
      break;
    }
  }
  auto centred_rms = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  out.rms_ctrl = centred_rms(fc);
  out.rms_lc = centred_rms(fl);
  out.samples = n;
  if (keep_window_) {
    out.x3_window = xs;
    out.xi3_window = xis;
  }
  return out;
}

void write_time_series_csv(const std::string& path, const std::vector<RigSample>& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(12);
  out << "t_s,x1_m,x2_m,x3_m,xi3_m,xi4_m,F_LC_N,F_ctrl_N,U_V\n";
  for (const auto& s : samples) {
    out << s.t << ',' << s.x[0] << ',' << s.x[1] << ',' << s.x[2] << ',' << s.xi3 << ',' << s.xi4
        << ',' << s.f_lc << ',' << s.f_ctrl << ',' << s.u << '\n';
  }
}

void write_lissajous_csv(const std::string& path, const SteadyState& state) {
  require(state.x3_window.size() == state.xi3_window.size() && !state.x3_window.empty(),
          "steady state carries no measured window");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(12) << "x3_m,xi3_m\n";
  for (std::size_t i = 0; i < state.x3_window.size(); ++i)
    out << state.x3_window[i] << ',' << state.xi3_window[i] << '\n';
}

}  // namespace hybridlab
