#include "hybridlab/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "json.hpp"

#include "hybridlab/experiments.hpp"
#include "hybridlab/io.hpp"
#include "hybridlab/oracle.hpp"
#include "hybridlab/stability.hpp"

namespace hybridlab {

namespace {

using Clock = std::chrono::steady_clock;

const char* const kNames[] = {
    "asymptotic stabilisability boundary",
    "unconditional instability below the boundary",
    "scalar delay equation boundary",
    "linear hybrid fidelity",
    "interface tolerance gate",
    "iteration economy",
    "nonlinear fold capture",
    "non-invasive control",
    "higher-harmonic refinement",
    "Broyden update",
    "implicit-Euler transfer",
    "determinism",
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << x;
  return s.str();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Frequencies (rad/s) where the branch turns: the extreme point before each
/// flagged point.
std::vector<double> fold_frequencies(const FrfBranch& b) {
  std::vector<double> out;
  for (std::size_t i = 1; i < b.points.size(); ++i)
    if (b.points[i].fold_flag) out.push_back(b.points[i - 1].omega);
  return out;
}

/// Branch amplitude at omega by linear interpolation; nullopt outside.
std::optional<double> interpolate(const std::vector<std::pair<double, double>>& sorted, double w) {
  if (sorted.empty() || w < sorted.front().first || w > sorted.back().first) return std::nullopt;
  auto it = std::lower_bound(sorted.begin(), sorted.end(), std::make_pair(w, -1e300));
  if (it == sorted.begin()) return it->second;
  const auto& [w1, a1] = *it;
  const auto& [w0, a0] = *std::prev(it);
  if (w1 == w0) return a1;
  return a0 + (a1 - a0) * (w - w0) / (w1 - w0);
}

class Suite {
 public:
  Suite(const ExperimentConfig& cfg, std::string dir) : cfg_(cfg), dir_(std::move(dir)) {}

  CheckResult run(int id) {
    CheckResult r;
    r.id = id;
    r.name = validation_check_name(id);
    r.seed = cfg_.seed;
    const auto t0 = Clock::now();
    try {
      switch (id) {
        case 1: boundary(r); break;
        case 2: unstable(r); break;
        case 3: scalar(r); break;
        case 4: fidelity(r); break;
        case 5: gate(r); break;
        case 6: iterations(r); break;
        case 7: folds(r); break;
        case 8: invasiveness(r); break;
        case 9: refinement(r); break;
        case 10: broyden(r); break;
        case 11: transfer(r); break;
        case 12: determinism(r); break;
        default: throw ValidationError("unknown check " + std::to_string(id));
      }
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
  }

 private:
  std::string sub(const std::string& name) const {
    return dir_.empty() ? std::string() : join_path(dir_, name);
  }

  HybridFamily family() const {
    return storey_family(cfg_.model.build_chain(), cfg_.model.interface_storey);
  }

  const FrfRun& linear() {
    if (!linear_) {
      ExperimentConfig c = cfg_;
      const auto& v = cfg_.validation;
      c.rig.h = v.linear_h;
      c.rig.settle_periods = v.linear_settle;
      c.frf.solve.rel_tol = v.linear_rel_tol;
      c.frf.solve.ds = v.linear_ds;
      c.frf.solve.ds_max = v.linear_ds_max;
      linear_ = run_frf(c, sub("linear_frf"));
    }
    return *linear_;
  }

  const NonlinearRun& nonlinear() {
    if (!nonlinear_) {
      ExperimentConfig c = cfg_;
      c.nonlinear.refine_hz = 0.0;  // refinement has its own check
      c.nonlinear.sweep_oracle = true;
      nonlinear_ = run_frf_nl(c, sub("nonlinear_frf"));
    }
    return *nonlinear_;
  }

  void boundary(CheckResult& r) {
    const auto& c = cfg_.chart;
    const auto& v = cfg_.validation;
    const StabilityGrid g = stability_chart(family(), {c.tau_min},
                                            cell_centres(c.p_min, c.p_max, c.p_cells), c.nodes);
    int changes = 0;
    double at = std::nan("");
    for (std::size_t j = 1; j < g.ps.size(); ++j) {
      const CellLabel a = g.at(0, j - 1).label, b = g.at(0, j).label;
      if (a != b) {
        ++changes;
        if (a == CellLabel::unstable && b == CellLabel::stabilisable)
          at = 0.5 * (g.ps[j - 1] + g.ps[j]);
      }
    }
    r.passed = changes == 1 && std::abs(at - v.boundary_p) <= v.boundary_tolerance;
    r.detail = "transition at p = " + fmt(at) + " (" + std::to_string(changes) +
               " label change(s)), expected " + fmt(v.boundary_p) + " +/- " +
               fmt(v.boundary_tolerance);
  }

  void unstable(CheckResult& r) {
    const auto& c = cfg_.chart;
    const double p = cfg_.validation.unstable_p;
    const HybridFamily fam = family();
    const std::vector<double> taus = cell_centres(c.tau_min, c.tau_max, c.tau_cells);
    const StabilityGrid g = stability_chart(fam, taus, {p}, c.nodes);
    std::size_t bad = 0;
    for (const auto& cell : g.cells) bad += cell.label != CellLabel::unstable;

    std::mt19937_64 rng(cfg_.seed);
    std::vector<std::size_t> idx(taus.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min<std::size_t>(3, idx.size()));
    std::sort(idx.begin(), idx.end());
    std::size_t diverged = 0;
    std::ostringstream sims;
    for (std::size_t i : idx) {
      const DelayedHybridModel m = fam(taus[i], p);
      const Vector q0 = Vector::Constant(m.dof(), 1e-3);
      const DdeSimulation s = simulate_dde(m, q0, default_dde_horizon(m), m.tau / 4.0);
      const bool grows = s.diverged || s.growth_rate > 0.0;
      diverged += grows;
      sims << " tau=" << fmt(taus[i]) << (s.diverged ? " diverged at t=" + fmt(s.diverged_at) + " s"
                                                     : " growth " + fmt(s.growth_rate) + "/s")
           << ';';
    }
    r.passed = bad == 0 && diverged == idx.size();
    r.detail = std::to_string(g.cells.size() - bad) + "/" + std::to_string(g.cells.size()) +
               " cells unstable at p = " + fmt(p) + ";" + sims.str();
  }

  void scalar(CheckResult& r) {
    // x'(t) = -x(t - tau): stable for tau < pi/2.
    DelayedHybridModel m;
    m.M0 = m.Mt = m.Ct = m.K0 = Matrix::Zero(1, 1);
    m.C0 = m.Kt = Matrix::Identity(1, 1);
    auto re = [&](double tau) {
      m.tau = tau;
      return rightmost_eigenvalue(semidiscretize(m, cfg_.chart.nodes)).real();
    };
    double lo = 1.0, hi = 2.0;
    require(re(lo) < 0.0 && re(hi) > 0.0, "scalar boundary not bracketed by [1, 2]");
    for (int k = 0; k < 50; ++k) {
      const double mid = 0.5 * (lo + hi);
      (re(mid) < 0.0 ? lo : hi) = mid;
    }
    const double tau = 0.5 * (lo + hi);
    const double err = std::abs(tau - kPi / 2) / (kPi / 2);
    r.passed = err <= cfg_.validation.scalar_tolerance;
    r.detail = "tau* = " + fmt(tau, 8) + ", relative error " + fmt(err, 3);
  }

  void fidelity(CheckResult& r) {
    const FrfRun& run = linear();
    const auto& v = cfg_.validation;
    const double w0 = kTwoPi * cfg_.frf.f_start, w1 = kTwoPi * cfg_.frf.f_end;
    const double slack = kTwoPi * cfg_.frf.solve.start_step_hz;
    bool ok = !run.cases.empty();
    std::ostringstream d;
    std::vector<std::vector<std::pair<double, double>>> curves;
    for (const auto& c : run.cases) {
      double worst = 0.0, lo = 1e300, hi = -1e300;
      std::vector<std::pair<double, double>> curve;
      for (std::size_t i = 0; i < c.branch.points.size(); ++i) {
        const auto& p = c.branch.points[i];
        worst = std::max(worst, std::abs(p.amplitude - c.oracle_amplitude[i]) / c.oracle_amplitude[i]);
        lo = std::min(lo, p.omega);
        hi = std::max(hi, p.omega);
        curve.emplace_back(p.omega, p.amplitude);
      }
      std::sort(curve.begin(), curve.end());
      curves.push_back(std::move(curve));
      const bool covers = lo <= std::min(w0, w1) + slack && hi >= std::max(w0, w1) - slack;
      const bool case_ok = c.branch.points.size() >= v.min_points && covers && !c.branch.stalled &&
                           worst <= v.fidelity_tolerance;
      ok = ok && case_ok;
      d << ratio_tag(c.mass_ratio) << ": " << c.branch.points.size() << " pts, max err "
        << fmt(100 * worst, 3) << "%" << (covers ? "" : ", range not covered")
        << (c.branch.stalled ? ", stalled" : "") << "; ";
    }
    double pair_worst = 0.0;
    for (std::size_t a = 0; a < curves.size(); ++a)
      for (std::size_t b = 0; b < curves.size(); ++b) {
        if (a == b) continue;
        for (const auto& [w, amp] : curves[a])
          if (auto other = interpolate(curves[b], w))
            pair_worst = std::max(pair_worst, std::abs(amp - *other) / *other);
      }
    ok = ok && pair_worst <= v.fidelity_tolerance;
    d << "pairwise max " << fmt(100 * pair_worst, 3) << "%";
    r.passed = ok;
    r.detail = d.str();
  }

  void gate(CheckResult& r) {
    const FrfRun& run = linear();
    const auto& v = cfg_.validation;
    std::size_t n = 0, good = 0;
    double worst = 0.0;
    for (const auto& c : run.cases)
      for (const auto& p : c.branch.points) {
        const double limit = std::max(v.gate_rel * p.amplitude, v.gate_abs);
        ++n;
        good += p.residual_norm <= limit;
        worst = std::max(worst, p.residual_norm / std::max(v.gate_rel * p.amplitude, 1e-300));
      }
    r.passed = n > 0 && good == n;
    r.detail = std::to_string(good) + "/" + std::to_string(n) +
               " accepted points within the gate; worst residual " + fmt(worst, 3) +
               " x the relative limit";
  }

  void iterations(CheckResult& r) {
    const FrfRun& run = linear();
    const double limit = cfg_.validation.median_iterations;
    std::vector<double> all;
    std::map<int, int> hist;
    std::ostringstream d;
    bool ok = !run.cases.empty();
    for (const auto& c : run.cases) {
      std::vector<double> its;
      for (const auto& p : c.branch.points) {
        its.push_back(p.iterations);
        ++hist[p.iterations];
      }
      all.insert(all.end(), its.begin(), its.end());
      const double m = median(its);
      ok = ok && !its.empty() && m <= limit;
      d << ratio_tag(c.mass_ratio) << " median " << fmt(m) << "; ";
    }
    if (!dir_.empty()) {
      std::ofstream out(join_path(ensure_directory(sub("linear_frf")), "histogram_all.csv"));
      out << "iterations,count\n";
      for (const auto& [it, count] : hist) out << it << ',' << count << '\n';
    }
    d << "pooled median " << fmt(median(all)) << " (limit " << fmt(limit) << "); histogram:";
    for (const auto& [it, count] : hist) d << ' ' << it << ':' << count;
    r.passed = ok;
    r.detail = d.str();
  }

  void folds(CheckResult& r) {
    const NonlinearRun& run = nonlinear();
    require(!run.branches.empty(), "no nonlinear branch was computed");
    const FrfBranch& b = run.branches.front();
    const std::vector<double> fw = fold_frequencies(b);
    std::ostringstream d;
    d << b.points.size() << " pts, " << fw.size() << " fold(s)";
    for (double w : fw) d << ' ' << fmt(w / kTwoPi, 6) << " Hz";
    bool ok = fw.size() == 2 && !b.stalled;

    if (fw.size() == 2) {
      // Three solutions where the branch crosses the midpoint frequency three times.
      const double mid = 0.5 * (fw[0] + fw[1]);
      int crossings = 0;
      for (std::size_t i = 1; i < b.points.size(); ++i)
        crossings += (b.points[i - 1].omega - mid) * (b.points[i].omega - mid) <= 0.0;
      d << "; " << crossings << " solutions at " << fmt(mid / kTwoPi, 6) << " Hz";
      ok = ok && crossings >= 3;
    }
    if (run.up && run.down && !fw.empty()) {
      const double step = kTwoPi * cfg_.nonlinear.sweep_step_hz;
      auto bracketed = [&](const SweepResult& s) {
        const double lo = std::min(s.jump_from, s.jump_to) - step;
        const double hi = std::max(s.jump_from, s.jump_to) + step;
        return std::any_of(fw.begin(), fw.end(), [&](double w) { return w >= lo && w <= hi; });
      };
      const bool up = bracketed(*run.up), down = bracketed(*run.down);
      d << "; sweep jumps up " << fmt(run.up->jump_from / kTwoPi, 6) << "->"
        << fmt(run.up->jump_to / kTwoPi, 6) << " Hz" << (up ? "" : " (no fold nearby)") << ", down "
        << fmt(run.down->jump_from / kTwoPi, 6) << "->" << fmt(run.down->jump_to / kTwoPi, 6)
        << " Hz" << (down ? "" : " (no fold nearby)");
      ok = ok && up && down;
    } else {
      ok = false;
    }
    r.passed = ok;
    r.detail = d.str();
  }

  void invasiveness(CheckResult& r) {
    std::vector<const FrfPoint*> pool;
    for (const auto& c : linear().cases)
      for (const auto& p : c.branch.points) pool.push_back(&p);
    const std::size_t linear_count = pool.size();
    for (const auto& b : nonlinear().branches)
      for (const auto& p : b.points) pool.push_back(&p);
    require(!pool.empty(), "no accepted points to sample");

    std::mt19937_64 rng(cfg_.seed);
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(cfg_.validation.random_points, idx.size()));
    double worst = 0.0;
    std::size_t from_linear = 0;
    for (std::size_t i : idx) {
      worst = std::max(worst, pool[i]->rms_ctrl / pool[i]->rms_lc);
      from_linear += i < linear_count;
    }
    r.passed = idx.size() == cfg_.validation.random_points && worst < cfg_.validation.invasiveness;
    r.detail = std::to_string(idx.size()) + " points (" + std::to_string(from_linear) +
               " linear, " + std::to_string(idx.size() - from_linear) +
               " nonlinear), max rms(F_ctrl)/rms(F_LC) = " + fmt(100 * worst, 3) + "%";
  }

  void refinement(CheckResult& r) {
    const auto& v = cfg_.validation;
    const RefinedPoint p = refine_nonlinear_point(cfg_, cfg_.nonlinear.refine_hz, v.refine_h);
    const double limit = std::max(v.gate_rel * p.point.amplitude, v.gate_abs);
    const double lis0 = lissajous_deviation(p.before), lis1 = lissajous_deviation(p.after);
    if (!dir_.empty()) {
      const std::string d = ensure_directory(sub("refinement"));
      write_lissajous_csv(join_path(d, "lissajous_fundamental.csv"), p.before);
      write_lissajous_csv(join_path(d, "lissajous_refined.csv"), p.after);
    }
    r.passed = p.solve.converged && p.higher_after <= limit && p.higher_after < p.higher_before &&
               lis1 < lis0;
    r.detail = "at " + fmt(cfg_.nonlinear.refine_hz) + " Hz: harmonics 2+ residual " +
               fmt(p.higher_before, 3) + " -> " + fmt(p.higher_after, 3) + " m (gate " +
               fmt(limit, 3) + "), Lissajous deviation " + fmt(lis0, 3) + " -> " + fmt(lis1, 3) +
               " m, " + std::to_string(p.solve.iterations) + " iterations" +
               (p.solve.converged ? "" : ", not converged");
  }

  void broyden(CheckResult& r) {
    const auto& v = cfg_.validation;
    const RigConfig rc = cfg_.linear_rig(0.5);
    // A linear rig converges in one Newton step at the default tolerance; the
    // tighter one forces several secant updates.
    SolveSettings s = cfg_.frf.solve;
    s.harmonics = 1;
    s.rel_tol = v.broyden_rel_tol;
    s.abs_tol = 1e-14;
    s.max_iterations = 40;
    Vector u0 = Vector::Zero(3);
    u0(2) = kTwoPi * 0.5 * (cfg_.frf.f_start + cfg_.frf.f_end);

    Rig rig_b(rc), rig_f(rc);
    const NewtonResult b = newton_solve(u0, rig_b, s, nullptr, true);
    const NewtonResult f = newton_solve(u0, rig_f, s, nullptr, false);

    double secant = 0.0;
    for (const auto& rec : b.broyden) {
      const double scale = rec.dphi.norm() + rec.J_new.norm() * rec.du.norm();
      secant = std::max(secant, (rec.J_new * rec.du - rec.dphi).norm() / scale);
    }
    const double amp = std::hypot(f.state.x3.a(0), f.state.x3.b(0));
    const double tol = v.gate_rel * amp;
    const double gap = std::max(std::abs(b.state.x3.a(0) - f.state.x3.a(0)),
                                std::abs(b.state.x3.b(0) - f.state.x3.b(0)));
    r.passed = b.converged && f.converged && !b.broyden.empty() && secant <= 1e-12 && gap <= tol;
    r.detail = std::to_string(b.broyden.size()) + " updates, max secant error " + fmt(secant, 3) +
               "; Broyden " + std::to_string(b.iterations) + " it / " +
               std::to_string(b.evaluations) + " evals vs full FD " + std::to_string(f.iterations) +
               " it / " + std::to_string(f.evaluations) + " evals; x3 difference " + fmt(gap, 3) +
               " m (tolerance " + fmt(tol, 3) + ")";
  }

  void transfer(CheckResult& r) {
    NumSubConfig nc = cfg_.linear_rig(0.5).numeric;
    nc.h = cfg_.rig.h;
    const double f_hz = 13.0;
    const double w = kTwoPi * f_hz;
    const NumericalSubstructure num(nc);
    const ComplexVector Z = implicit_euler_transfer(nc, w, true);

    // Interface held at rest, grounding loop closed; long settle then a
    // whole-period window.
    const int periods = 13;
    const std::size_t settle = static_cast<std::size_t>(std::llround(400.0 / nc.h));
    const std::size_t window = samples_for_periods(nc.h, w, periods);
    NumState z = NumState::Zero();
    std::vector<double> xi3, xi4;
    xi3.reserve(window);
    xi4.reserve(window);
    for (std::size_t i = 0; i < settle + window; ++i) {
      const double t = static_cast<double>(i) * nc.h;
      if (i >= settle) {
        xi3.push_back(z(2));
        xi4.push_back(z(3));
      }
      const double f_ctrl = numerical_grounding_force(0.0, 0.0, z(2), z(0), nc.kp_hat, nc.kd_hat);
      z = step_numeric(num, z, 0.0, f_ctrl, nc.forcing * std::cos(w * t), 0.0);
    }
    const double phase0 = std::fmod(w * static_cast<double>(settle) * nc.h, kTwoPi);
    auto err = [&](const std::vector<double>& x, Complex expected) {
      const FourierSignal s = extract_fourier(x, nc.h, w, 1, periods, phase0);
      return std::abs(Complex(s.a(0), -s.b(0)) - expected) / std::abs(expected);
    };
    const double e3 = err(xi3, Z(2)), e4 = err(xi4, Z(3));
    r.passed = std::max(e3, e4) <= cfg_.validation.transfer_tolerance;
    r.detail = "at " + fmt(f_hz) + " Hz, h = " + fmt(nc.h) + " s: relative gain error xi3 " +
               fmt(e3, 3) + ", xi4 " + fmt(e4, 3);
  }

  void determinism(CheckResult& r) {
    namespace fs = std::filesystem;
    ExperimentConfig c = cfg_;
    c.frf.mass_ratios = {0.5};
    c.frf.f_start = 13.0;
    c.frf.f_end = 13.1;
    c.frf.oracle_points = 11;
    const fs::path base = dir_.empty() ? fs::temp_directory_path() / "hybridlab_determinism"
                                       : fs::path(sub("determinism"));
    const std::string a = (base / "run_a").string(), b = (base / "run_b").string();
    const FrfRun ra = run_frf(c, a);
    run_frf(c, b);
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    std::size_t compared = 0, equal = 0;
    for (const auto& name : ra.files) {
      if (fs::path(name).extension() != ".csv") continue;
      ++compared;
      const std::string x = slurp(base / "run_a" / name), y = slurp(base / "run_b" / name);
      equal += !x.empty() && x == y;
    }
    if (dir_.empty()) fs::remove_all(base);
    r.passed = compared > 0 && equal == compared;
    r.detail = std::to_string(equal) + "/" + std::to_string(compared) + " CSV files bit-identical";
  }

  ExperimentConfig cfg_;
  std::string dir_;
  std::optional<FrfRun> linear_;
  std::optional<NonlinearRun> nonlinear_;
};

}  // namespace

bool ValidationReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

int validation_check_count() { return static_cast<int>(std::size(kNames)); }

std::string validation_check_name(int id) {
  require(id >= 1 && id <= validation_check_count(), "no such check");
  return kNames[id - 1];
}

ValidationReport run_validation(const ExperimentConfig& cfg, const std::string& dir,
                                const std::function<void(const CheckResult&)>& on_result) {
  cfg.validate();
  std::vector<int> ids = cfg.validation.checks;
  if (ids.empty()) {
    ids.resize(static_cast<std::size_t>(validation_check_count()));
    std::iota(ids.begin(), ids.end(), 1);
  }
  if (!dir.empty()) ensure_directory(dir);
  Suite suite(cfg, dir);
  ValidationReport report;
  for (int id : ids) {
    report.checks.push_back(suite.run(id));
    if (on_result) on_result(report.checks.back());
  }
  return report;
}

std::string format_check(const CheckResult& r) {
  std::ostringstream s;
  s << (r.passed ? "PASS" : "FAIL") << "  [" << std::setw(2) << r.id << "] " << r.name << "  ("
    << std::fixed << std::setprecision(1) << r.seconds << " s, seed " << r.seed << ")  "
    << r.detail;
  return s.str();
}

void write_report_json(const std::string& path, const ValidationReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"id", c.id},
                      {"name", c.name},
                      {"passed", c.passed},
                      {"detail", c.detail},
                      {"seconds", c.seconds},
                      {"seed", c.seed}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << nlohmann::json{{"passed", report.passed()}, {"checks", checks}}.dump(2) << '\n';
}

}  // namespace hybridlab
