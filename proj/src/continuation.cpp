#include "hybridlab/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>

#include "json.hpp"

namespace hybridlab {

void SolveSettings::validate() const {
  require(harmonics >= 1, "need at least one harmonic");
  require(rel_tol > 0.0 && abs_tol > 0.0, "tolerances must be positive");
  require(max_iterations >= 1, "need at least one iteration");
  require(m_min > 0.0 && m_min <= 1.0, "minimum line-search damping must lie in (0, 1]");
  require(fd_coefficient > 0.0 && fd_omega > 0.0, "finite-difference steps must be positive");
  require(amplitude_floor > 0.0 && omega_scale > 0.0, "arclength scales must be positive");
  require(ds > 0.0 && ds_min > 0.0 && ds_max >= ds_min && ds_growth >= 1.0,
          "invalid arclength step settings");
  require(start_step_hz > 0.0 && max_points >= 1, "invalid branch settings");
  require(first_step_scale > 0.0, "first step scale must be positive");
}

Vector make_target_vector(const FourierSignal& target) {
  const int n = target.harmonics();
  Vector u(2 * n + 1);
  u.head(n) = target.a;
  u.segment(n, n) = target.b;
  u(2 * n) = target.omega;
  return u;
}

FourierSignal target_signal(const Vector& u, int harmonics) {
  require(u.size() == 2 * harmonics + 1, "target vector size does not match the harmonic count");
  FourierSignal s(u(2 * harmonics), harmonics);
  s.a = u.head(harmonics);
  s.b = u.segment(harmonics, harmonics);
  return s;
}

double target_omega(const Vector& u) { return u(u.size() - 1); }

Vector arclength_weights(const Vector& u, const SolveSettings& settings) {
  const int n = static_cast<int>(u.size() - 1) / 2;
  const double amp = std::max(std::hypot(u(0), u(n)), settings.amplitude_floor);
  Vector w = Vector::Constant(u.size(), 1.0 / amp);
  w(u.size() - 1) = 1.0 / settings.omega_scale;
  return w;
}

Residual residual(const Vector& u, Rig& rig, const SolveSettings& settings) {
  const int n = settings.harmonics;
  ControlTarget target{target_signal(u, n), rig.config().gains};
  Residual r;
  r.state = rig.run_to_steady_state(target, target_omega(u), n);
  r.values.resize(2 * n);
  r.values.head(n) = r.state.x3.a.head(n) - r.state.xi3.a.head(n);
  r.values.segment(n, n) = r.state.x3.b.head(n) - r.state.xi3.b.head(n);
  return r;
}

double arclength_row(const Vector& u, const Vector& secant, const Vector& prediction,
                     const Vector& weights) {
  require(secant.size() == u.size() && prediction.size() == u.size() && weights.size() == u.size(),
          "arclength vectors must match the unknown size");
  require(secant.cwiseAbs().maxCoeff() > 0.0, "secant must be non-zero");
  const Vector w2 = weights.cwiseProduct(weights);
  return w2.cwiseProduct(secant).dot(prediction - u);
}

Residual extended_residual(const Vector& u, const Vector& secant, const Vector& prediction,
                           const Vector& weights, Rig& rig, const SolveSettings& settings) {
  const double row = arclength_row(u, secant, prediction, weights);
  Residual r = residual(u, rig, settings);
  r.values.conservativeResize(r.values.size() + 1);
  r.values(r.values.size() - 1) = row;
  return r;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double scaled_condition(const Matrix& J, const Vector& col_weights, double row_weight, bool extended) {
  Matrix S = J;
  for (Eigen::Index c = 0; c < S.cols(); ++c) S.col(c) /= col_weights(c);
  const Eigen::Index rig_rows = extended ? S.rows() - 1 : S.rows();
  S.topRows(rig_rows) *= row_weight;
  Eigen::JacobiSVD<Matrix> svd(S);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / sv(sv.size() - 1);
}

}  // namespace

JacobianEstimate fd_jacobian(const Vector& u, const Vector& phi, Rig& rig,
                             const SolveSettings& settings, const SecantContext* secant) {
  const int n = settings.harmonics;
  const Eigen::Index nc = 2 * n;
  const bool ext = secant != nullptr;
  const Eigen::Index rows = ext ? nc + 1 : nc;
  const Eigen::Index cols = ext ? nc + 1 : nc;
  require(u.size() == 2 * n + 1, "target vector size does not match the harmonic count");
  require(phi.size() >= nc, "residual too short");

  JacobianEstimate est;
  est.J = Matrix::Zero(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    Vector up = u;
    const double step = c < nc ? settings.fd_coefficient : settings.fd_omega;
    up(c) += step;
    const Residual r = residual(up, rig, settings);
    est.J.block(0, c, nc, 1) = (r.values - phi.head(nc)) / step;
  }
  if (ext) {
    const Vector w2 = secant->weights.cwiseProduct(secant->weights);
    est.J.row(nc) = -w2.cwiseProduct(secant->secant).transpose();
  }
  const Vector w = ext ? secant->weights : arclength_weights(u, settings).head(nc);
  est.condition = scaled_condition(est.J, w, w(0), ext);
  est.ill_conditioned = !(est.condition < settings.condition_limit);
  return est;
}

Matrix broyden_update(const Matrix& J, const Vector& du, const Vector& dphi, const Vector& weights) {
  require(du.size() == J.cols() && dphi.size() == J.rows(), "Broyden update size mismatch");
  const Vector wdu = weights.size() ? Vector(weights.cwiseProduct(weights).cwiseProduct(du)) : du;
  const double denom = du.dot(wdu);
  require(denom > 0.0 && std::isfinite(denom), "Broyden update needs a non-zero step");
  return J + ((dphi - J * du) / denom) * wdu.transpose();
}

double interface_error(const Vector& phi, int harmonics) {
  return phi.head(2 * harmonics).cwiseAbs().maxCoeff();
}

bool within_tolerance(const Vector& phi, const SteadyState& state, const SolveSettings& settings) {
  const double gate = std::max(settings.rel_tol * state.x3.amplitude(1), settings.abs_tol);
  return interface_error(phi, settings.harmonics) <= gate;
}

NewtonResult newton_solve(const Vector& u0, Rig& rig, const SolveSettings& settings,
                          const SecantContext* secant, bool use_broyden, const Matrix* jacobian) {
  settings.validate();
  require(u0.allFinite(), "initial target must be finite");
  require(u0.size() == 2 * settings.harmonics + 1, "target vector size does not match harmonics");
  const int n = settings.harmonics;
  const bool ext = secant != nullptr;
  const Eigen::Index nu = ext ? 2 * n + 1 : 2 * n;  // unknowns actually moved
  const std::size_t evals0 = rig.evaluations();

  const Vector weights = ext ? secant->weights : arclength_weights(u0, settings);
  const Vector step_weights = weights.head(nu);
  auto evaluate = [&](const Vector& u) {
    return ext ? extended_residual(u, secant->secant, secant->prediction, secant->weights, rig,
                                   settings)
               : residual(u, rig, settings);
  };
  auto merit = [&](const Vector& phi) {
    Vector s = phi;
    s.head(2 * n) *= weights(0);
    return s.norm();
  };

  NewtonResult out;
  out.u = u0;
  Residual cur = evaluate(u0);
  out.trace.push_back({0, u0, cur.values, merit(cur.values), 1.0, true, false});
  auto finish = [&](bool ok, const std::string& msg) {
    out.converged = ok;
    out.phi = cur.values;
    out.state = cur.state;
    out.evaluations = static_cast<int>(rig.evaluations() - evals0);
    out.message = msg;
    return out;
  };
  if (within_tolerance(cur.values, cur.state, settings)) return finish(true, "converged");

  JacobianEstimate est;
  if (jacobian && jacobian->rows() == cur.values.size() && jacobian->cols() == nu) {
    est.J = *jacobian;
    est.provenance = JacobianProvenance::broyden;
    if (ext) {
      const Vector w2 = secant->weights.cwiseProduct(secant->weights);
      est.J.row(2 * n) = -w2.cwiseProduct(secant->secant).transpose();
    }
  } else {
    est = fd_jacobian(out.u, cur.values, rig, settings, secant);
    ++out.fd_jacobians;
    out.ill_conditioned = est.ill_conditioned;
  }
  Matrix J = est.J;
  int bottomed = 0;

  for (int it = 1; it <= settings.max_iterations; ++it) {
    Eigen::FullPivLU<Matrix> lu(J);
    if (!lu.isInvertible()) {
      out.J = J;
      out.iterations = it - 1;
      return finish(false, "singular Jacobian");
    }
    Vector delta = Vector::Zero(out.u.size());
    delta.head(nu) = lu.solve(-cur.values);
    if (it == 1) delta *= settings.first_step_scale;

    const double norm0 = merit(cur.values);
    double m = 1.0;
    Vector trial_u;
    Residual trial;
    bool accepted = false;
    while (true) {
      trial_u = out.u + m * delta;
      // a trial the rig cannot run (omega <= 0, divergence, no steady state)
      // counts as a rejected step
      try {
        trial = evaluate(trial_u);
      } catch (const std::invalid_argument&) {
        trial.values = Vector::Constant(cur.values.size(), kInf);
      } catch (const RigError&) {
        trial.values = Vector::Constant(cur.values.size(), kInf);
      }
      if (merit(trial.values) < norm0) {
        accepted = true;
        break;
      }
      if (m * 0.5 < settings.m_min * (1.0 - 1e-12)) break;
      m *= 0.5;
    }

    // secant information from the last trial, accepted or not
    const Vector du = (trial_u - out.u).head(nu);
    const Vector dphi = trial.values - cur.values;
    bool refresh = false;
    if (accepted) {
      bottomed = 0;
    } else if (++bottomed >= 2) {
      refresh = true;
      bottomed = 0;
    }
    if (use_broyden && !refresh && du.norm() > 0.0 && dphi.allFinite()) {
      J = broyden_update(J, du, dphi, step_weights);
      out.broyden.push_back({J, du, dphi});
    }
    if (accepted) {
      out.u = trial_u;
      cur = std::move(trial);
    }
    if (refresh || !use_broyden) {
      est = fd_jacobian(out.u, cur.values, rig, settings, secant);
      ++out.fd_jacobians;
      out.ill_conditioned = out.ill_conditioned || est.ill_conditioned;
      J = est.J;
    }
    out.trace.push_back({it, out.u, cur.values, merit(cur.values), accepted ? m : 0.0, accepted,
                         refresh});
    out.iterations = it;
    if (within_tolerance(cur.values, cur.state, settings)) {
      out.J = J;
      return finish(true, "converged");
    }
  }
  out.J = J;
  return finish(false, "maximum iterations exceeded");
}

std::size_t FrfBranch::fold_count() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const FrfPoint& p) { return p.fold_flag; }));
}

namespace {

FrfPoint make_point(const NewtonResult& r, int harmonics) {
  FrfPoint p;
  p.omega = target_omega(r.u);
  p.amplitude = r.state.x3.amplitude(1);
  p.u = r.u;
  p.x3 = r.state.x3;
  p.xi3 = r.state.xi3;
  p.residual_norm = interface_error(r.phi, harmonics);
  p.iterations = r.iterations;
  p.evaluations = r.evaluations;
  p.rms_ctrl = r.state.rms_ctrl;
  p.rms_lc = r.state.rms_lc;
  return p;
}

}  // namespace

FrfBranch continue_frf(double omega_start, double omega_end, Rig& rig,
                       const SolveSettings& settings, const Vector* initial,
                       const std::function<void(const FrfPoint&)>& on_point) {
  settings.validate();
  require(std::isfinite(omega_start) && omega_start > 0.0 && std::isfinite(omega_end) &&
              omega_end > 0.0,
          "sweep frequencies must be positive");
  const int n = settings.harmonics;
  const std::size_t evals0 = rig.evaluations();
  FrfBranch branch;
  auto push = [&](FrfPoint p) {
    if (on_point) on_point(p);
    branch.points.push_back(std::move(p));
  };
  auto done = [&](const std::string& msg) {
    branch.message = msg;
    branch.evaluations = static_cast<int>(rig.evaluations() - evals0);
    return branch;
  };

  Vector u0;
  if (initial) {
    require(initial->size() == 2 * n + 1, "initial target has the wrong size");
    u0 = *initial;
  } else {
    u0 = Vector::Zero(2 * n + 1);
  }
  u0(2 * n) = omega_start;

  NewtonResult first = newton_solve(u0, rig, settings);
  if (!first.converged) {
    branch.stalled = true;
    return done("first natural solve failed: " + first.message);
  }
  push(make_point(first, n));
  if (omega_end == omega_start) return done("single point");

  const double dir = omega_end > omega_start ? 1.0 : -1.0;
  Vector u1 = first.u;
  u1(2 * n) = omega_start + dir * kTwoPi * settings.start_step_hz;
  NewtonResult second = newton_solve(u1, rig, settings);
  if (!second.converged) {
    branch.stalled = true;
    return done("second natural solve failed: " + second.message);
  }
  push(make_point(second, n));

  double ds = settings.ds;
  int easy = 0;
  Matrix carried;  // last extended Jacobian, reused as the next starting estimate
  const double back_margin = kTwoPi * settings.start_step_hz;
  while (branch.points.size() < settings.max_points) {
    const Vector& ua = branch.points[branch.points.size() - 1].u;
    const Vector& ub = branch.points[branch.points.size() - 2].u;
    SecantContext ctx;
    ctx.weights = arclength_weights(ua, settings);
    const Vector s = ua - ub;
    const double norm = ctx.weights.cwiseProduct(s).norm();
    require(norm > 0.0, "consecutive branch points coincide");
    ctx.secant = s / norm;
    ctx.prediction = ua + ds * ctx.secant;

    NewtonResult r;
    try {
      r = newton_solve(ctx.prediction, rig, settings, &ctx, true,
                       settings.reuse_jacobian && carried.size() ? &carried : nullptr);
    } catch (const RigError& e) {
      r.converged = false;
      r.message = e.what();
    }
    if (r.J.size()) carried = r.J;
    if (!r.converged) {
      carried.resize(0, 0);
      ++branch.failures;
      easy = 0;
      ds *= 0.5;
      if (ds < settings.ds_min) {
        branch.stalled = true;
        return done("step size fell below the minimum: " + r.message);
      }
      continue;
    }
    FrfPoint p = make_point(r, n);
    const double d_prev = target_omega(ua) - target_omega(ub);
    const double d_new = p.omega - target_omega(ua);
    p.fold_flag = (d_prev > 0.0) != (d_new > 0.0);
    const double reached = (p.omega - omega_end) * dir;
    const double behind = (omega_start - p.omega) * dir;
    push(std::move(p));

    if (r.iterations <= settings.easy_iterations) {
      if (++easy >= 2) {
        ds = std::min(ds * settings.ds_growth, settings.ds_max);
        easy = 0;
      }
    } else {
      easy = 0;
    }
    if (reached >= 0.0) return done("reached the end frequency");
    if (behind > back_margin) return done("branch turned back past the start frequency");
  }
  return done("maximum number of points reached");
}

double lissajous_deviation(const SteadyState& state) {
  const auto& x = state.x3_window;
  const auto& y = state.xi3_window;
  require(!x.empty() && x.size() == y.size(), "steady state carries no measured window");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = (x[i] - mx) - (y[i] - my);
    s += 0.5 * d * d;
  }
  return std::sqrt(s / static_cast<double>(x.size()));
}

RefinedPoint match_higher_harmonics(const FrfPoint& point, Rig& rig, const SolveSettings& settings) {
  settings.validate();
  const int n = settings.harmonics;
  require(point.u.size() >= 3, "point carries no target");
  const int n0 = static_cast<int>(point.u.size() - 1) / 2;

  Vector u0 = Vector::Zero(2 * n + 1);
  for (int k = 0; k < std::min(n, n0); ++k) {
    u0(k) = point.u(k);
    u0(n + k) = point.u(n0 + k);
  }
  u0(2 * n) = point.omega;

  auto higher = [&](const Vector& phi) {
    double m = 0.0;
    for (int k = 1; k < n; ++k) m = std::max({m, std::abs(phi(k)), std::abs(phi(n + k))});
    return m;
  };

  RefinedPoint out;
  rig.keep_window(true);
  const Residual before = residual(u0, rig, settings);
  out.before = before.state;
  out.higher_before = higher(before.values);
  out.fundamental_before = std::max(std::abs(before.values(0)), std::abs(before.values(n)));
  out.solve = newton_solve(u0, rig, settings);
  out.after = out.solve.state;
  rig.keep_window(false);
  out.higher_after = higher(out.solve.phi);
  out.point = make_point(out.solve, n);
  return out;
}

void write_branch_csv(const std::string& path, const FrfBranch& branch) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(12) << "omega_rad_s,f_Hz,A3_m,residual_norm,iterations,fold_flag\n";
  for (const auto& p : branch.points) {
    out << p.omega << ',' << p.omega / kTwoPi << ',' << p.amplitude << ',' << p.residual_norm << ','
        << p.iterations << ',' << (p.fold_flag ? 1 : 0) << '\n';
  }
}

void write_histogram_csv(const std::string& path, const FrfBranch& branch) {
  std::map<int, int> counts;
  for (const auto& p : branch.points) ++counts[p.iterations];
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "iterations,count\n";
  for (const auto& [it, c] : counts) out << it << ',' << c << '\n';
}

void write_coefficients_json(const std::string& path, const FrfBranch& branch) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : branch.points) {
    points.push_back({{"omega_rad_s", p.omega},
                      {"target", vec(p.u)},
                      {"x3", {{"a0", p.x3.a0}, {"a", vec(p.x3.a)}, {"b", vec(p.x3.b)}}},
                      {"xi3", {{"a0", p.xi3.a0}, {"a", vec(p.xi3.a)}, {"b", vec(p.xi3.b)}}},
                      {"residual_norm", p.residual_norm},
                      {"iterations", p.iterations},
                      {"evaluations", p.evaluations},
                      {"rms_ctrl_N", p.rms_ctrl},
                      {"rms_lc_N", p.rms_lc}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(17)
      << nlohmann::json{{"points", points}, {"stalled", branch.stalled}, {"message", branch.message}}
             .dump(1)
      << '\n';
}

}  // namespace hybridlab
