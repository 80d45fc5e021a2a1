#include "hybridlab/config.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hybridlab {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// leftovers (typos, stale options) can be rejected.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + " must be a JSON object");
  }

  template <class T>
  void get(const std::string& key, T& value) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      value = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError("bad value for '" + name(key) + "'");
    }
  }

  std::optional<Reader> section(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Reader(j_.at(key), name(key));
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ValidationError("unknown key '" + name(item.key()) + "'");
    }
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  bool has(const std::string& key) const { return j_.contains(key); }

 private:
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_solve(Reader& r, SolveSettings& s) {
  r.get("harmonics", s.harmonics);
  r.get("rel_tol", s.rel_tol);
  r.get("abs_tol", s.abs_tol);
  r.get("max_iterations", s.max_iterations);
  r.get("m_min", s.m_min);
  r.get("fd_coefficient", s.fd_coefficient);
  r.get("fd_omega", s.fd_omega);
  r.get("amplitude_floor", s.amplitude_floor);
  r.get("omega_scale", s.omega_scale);
  r.get("ds", s.ds);
  r.get("ds_min", s.ds_min);
  r.get("ds_max", s.ds_max);
  r.get("ds_growth", s.ds_growth);
  r.get("easy_iterations", s.easy_iterations);
  r.get("start_step_hz", s.start_step_hz);
  r.get("max_points", s.max_points);
  r.get("condition_limit", s.condition_limit);
  r.get("first_step_scale", s.first_step_scale);
  r.get("reuse_jacobian", s.reuse_jacobian);
  r.finish();
}

json solve_json(const SolveSettings& s) {
  return {{"harmonics", s.harmonics},
          {"rel_tol", s.rel_tol},
          {"abs_tol", s.abs_tol},
          {"max_iterations", s.max_iterations},
          {"m_min", s.m_min},
          {"fd_coefficient", s.fd_coefficient},
          {"fd_omega", s.fd_omega},
          {"amplitude_floor", s.amplitude_floor},
          {"omega_scale", s.omega_scale},
          {"ds", s.ds},
          {"ds_min", s.ds_min},
          {"ds_max", s.ds_max},
          {"ds_growth", s.ds_growth},
          {"easy_iterations", s.easy_iterations},
          {"start_step_hz", s.start_step_hz},
          {"max_points", s.max_points},
          {"condition_limit", s.condition_limit},
          {"first_step_scale", s.first_step_scale},
          {"reuse_jacobian", s.reuse_jacobian}};
}

void read_range(Reader& r, const std::string& key, double& lo, double& hi) {
  if (!r.has(key)) return;
  std::vector<double> v;
  r.get(key, v);
  require(v.size() == 2, "'" + key + "' must be a [low, high] pair");
  lo = v[0];
  hi = v[1];
}

}  // namespace

StoreyChainSpec ModelSection::build_chain() const {
  if (chain.empty()) return reference_building(storeys);
  StoreyChainSpec c;
  c.storeys = chain;
  c.validate();
  return c;
}

NonlinearSection::NonlinearSection() {
  solve.harmonics = 3;
  solve.ds = 0.08;
  solve.ds_max = 0.1;
}

void ExperimentConfig::validate() const {
  const StoreyChainSpec chain = model.build_chain();
  require(model.interface_storey >= 2 && model.interface_storey < chain.size(),
          "interface storey must have storeys on both sides");
  require(std::isfinite(model.tau) && model.tau > 0.0, "tau must be positive");
  require(model.mass_ratio > 0.0 && model.mass_ratio <= 1.0, "mass ratio must lie in (0, 1]");

  require(chart.tau_cells >= 1 && chart.p_cells >= 1, "chart grid needs at least one cell");
  // A degenerate range is a single column or row of the chart.
  require(chart.tau_min > 0.0 && (chart.tau_max > chart.tau_min ||
                                  (chart.tau_max == chart.tau_min && chart.tau_cells == 1)),
          "chart tau range must be increasing");
  require(chart.p_min > 0.0 && chart.p_max <= 1.0 &&
              (chart.p_max > chart.p_min || (chart.p_max == chart.p_min && chart.p_cells == 1)),
          "chart p range must be increasing inside (0, 1]");
  require(chart.nodes >= 3, "need at least 3 collocation nodes");

  require(std::isfinite(frf.f_start) && frf.f_start > 0.0 && std::isfinite(frf.f_end) &&
              frf.f_end > 0.0,
          "sweep frequencies must be positive");
  require(!frf.mass_ratios.empty(), "need at least one mass ratio");
  for (double p : frf.mass_ratios) require(p > 0.0 && p < 1.0, "rig mass ratios must lie in (0, 1)");
  require(frf.oracle_points >= 2, "oracle grid needs at least 2 points");
  frf.solve.validate();

  require(nonlinear.from == "low" || nonlinear.from == "high" || nonlinear.from == "both",
          "nonlinear.from must be low, high or both");
  require(nonlinear.f_start > 0.0 && nonlinear.f_end > nonlinear.f_start,
          "nonlinear sweep range must be increasing");
  require(nonlinear.refine_harmonics >= 1, "refinement needs at least one harmonic");
  require(nonlinear.refine_iterations >= 1, "refine_iterations must be positive");
  require(validation.refine_h > 0.0, "validation.refine_h must be positive");
  require(validation.broyden_rel_tol > 0.0, "validation.broyden_rel_tol must be positive");
  require(nonlinear.sweep_step_hz > 0.0 && nonlinear.sweep_h > 0.0, "invalid oracle sweep grid");
  nonlinear.solve.validate();

  require(validation.boundary_tolerance > 0.0 && validation.fidelity_tolerance > 0.0 &&
              validation.gate_rel > 0.0 && validation.gate_abs >= 0.0 &&
              validation.invasiveness > 0.0 && validation.transfer_tolerance > 0.0,
          "validation thresholds must be positive");
  for (int c : validation.checks) require(c >= 1 && c <= 12, "validation checks are numbered 1-12");

  // Charts accept any chain; the rig sections only apply to the 4-storey split.
  if (chain.size() == 4 && model.interface_storey == 3) {
    linear_rig(frf.mass_ratios.front()).validate();
    nonlinear_rig().validate();
  }
}

RigConfig ExperimentConfig::linear_rig(double p) const {
  const StoreyChainSpec chain = model.build_chain();
  require(chain.size() == 4 && model.interface_storey == 3,
          "the rig emulates a 4-storey chain with the interface at storey 3");
  require(p > 0.0 && p < 1.0, "rig mass ratio must lie in (0, 1)");
  RigConfig rc;
  for (std::size_t r = 0; r < 3; ++r) rc.plant.storeys[r] = chain.storeys[r];
  rc.plant.shaker_gain = rig.shaker_gain;
  rc.plant.actuator_lag = rig.actuator_lag;
  rc.plant.displacement_noise = rig.displacement_noise;
  rc.plant.force_noise = rig.force_noise;
  rc.plant.seed = seed;
  rc.plant.bilinear = BilinearLaw::through_origin(chain.storeys[2].stiffness,
                                                  chain.storeys[2].stiffness, 0.0);
  auto& n = rc.numeric;
  n.mu3 = p * chain.storeys[2].mass;
  n.m3comp = n.mu3;
  n.mu4 = chain.storeys[3].mass;
  n.gamma4 = chain.storeys[3].damping;
  n.sigma4 = chain.storeys[3].stiffness;
  n.forcing = rig.forcing;
  n.h = rig.h;
  n.kp_hat = rig.kp_hat;
  n.kd_hat = rig.kd_hat;
  rc.gains = rig.gains;
  rc.settle_periods = rig.settle_periods;
  rc.measure_periods = rig.measure_periods;
  rc.steady_tolerance = rig.steady_tolerance;
  rc.max_extra_windows = rig.max_extra_windows;
  return rc;
}

RigConfig ExperimentConfig::nonlinear_rig() const {
  RigConfig rc = linear_rig(nonlinear.mass_ratio);
  rc.plant.mode = RestoringMode::bilinear;
  rc.plant.preload = nonlinear.preload;
  rc.plant.bilinear = BilinearLaw::softening_below(nonlinear.preload, rc.plant.storeys[2].stiffness,
                                                   nonlinear.soft_ratio, nonlinear.gap);
  rc.numeric.h = nonlinear.h;
  return rc;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Reader r(root, "");
  r.get("output", cfg.output);
  r.get("seed", cfg.seed);

  if (auto m = r.section("model")) {
    m->get("storeys", cfg.model.storeys);
    if (m->has("chain")) {
      const json& list = m->raw("chain");
      require(list.is_array(), "model.chain must be a list of storeys");
      cfg.model.chain.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        Reader s(list[i], "model.chain[" + std::to_string(i) + "]");
        StoreySpec spec;
        s.get("mass", spec.mass);
        s.get("damping", spec.damping);
        s.get("stiffness", spec.stiffness);
        s.finish();
        cfg.model.chain.push_back(spec);
      }
    }
    m->get("interface_storey", cfg.model.interface_storey);
    m->get("mass_ratio", cfg.model.mass_ratio);
    m->get("tau", cfg.model.tau);
    m->finish();
  }

  if (auto c = r.section("chart")) {
    read_range(*c, "tau_range", cfg.chart.tau_min, cfg.chart.tau_max);
    read_range(*c, "p_range", cfg.chart.p_min, cfg.chart.p_max);
    if (c->has("grid")) {
      std::vector<std::size_t> g;
      c->get("grid", g);
      require(g.size() == 2, "chart.grid must be [tau_cells, p_cells]");
      cfg.chart.tau_cells = g[0];
      cfg.chart.p_cells = g[1];
    }
    c->get("nodes", cfg.chart.nodes);
    c->get("boundaries", cfg.chart.boundaries);
    if (auto b = c->section("bisection")) {
      b->get("seed_tau", cfg.chart.bisection.seed_tau);
      b->get("seed_p", cfg.chart.bisection.seed_p);
      b->get("seed_omega", cfg.chart.bisection.seed_omega);
      b->get("depth", cfg.chart.bisection.depth);
      b->get("tolerance", cfg.chart.bisection.tolerance);
      b->finish();
    }
    c->finish();
  }

  if (auto g = r.section("rig")) {
    auto& s = cfg.rig;
    g->get("shaker_gain", s.shaker_gain);
    g->get("actuator_lag", s.actuator_lag);
    g->get("displacement_noise", s.displacement_noise);
    g->get("force_noise", s.force_noise);
    g->get("kp", s.gains.kp);
    g->get("kd", s.gains.kd);
    g->get("kp_hat", s.kp_hat);
    g->get("kd_hat", s.kd_hat);
    g->get("forcing", s.forcing);
    g->get("h", s.h);
    g->get("settle_periods", s.settle_periods);
    g->get("measure_periods", s.measure_periods);
    g->get("steady_tolerance", s.steady_tolerance);
    g->get("max_extra_windows", s.max_extra_windows);
    g->finish();
  }

  if (auto f = r.section("frf")) {
    f->get("mass_ratios", cfg.frf.mass_ratios);
    f->get("f_start_hz", cfg.frf.f_start);
    f->get("f_end_hz", cfg.frf.f_end);
    f->get("oracle_points", cfg.frf.oracle_points);
    if (auto s = f->section("solve")) read_solve(*s, cfg.frf.solve);
    f->finish();
  }

  if (auto n = r.section("nonlinear")) {
    auto& s = cfg.nonlinear;
    n->get("mass_ratio", s.mass_ratio);
    n->get("preload", s.preload);
    n->get("soft_ratio", s.soft_ratio);
    n->get("gap", s.gap);
    n->get("f_start_hz", s.f_start);
    n->get("f_end_hz", s.f_end);
    n->get("h", s.h);
    n->get("from", s.from);
    n->get("refine_hz", s.refine_hz);
    n->get("refine_harmonics", s.refine_harmonics);
    n->get("refine_iterations", s.refine_iterations);
    n->get("sweep_oracle", s.sweep_oracle);
    n->get("sweep_step_hz", s.sweep_step_hz);
    n->get("sweep_h", s.sweep_h);
    if (auto v = n->section("solve")) read_solve(*v, s.solve);
    n->finish();
  }

  if (auto v = r.section("validation")) {
    auto& s = cfg.validation;
    v->get("checks", s.checks);
    v->get("boundary_p", s.boundary_p);
    v->get("boundary_tolerance", s.boundary_tolerance);
    v->get("scalar_tolerance", s.scalar_tolerance);
    v->get("fidelity_tolerance", s.fidelity_tolerance);
    v->get("gate_rel", s.gate_rel);
    v->get("gate_abs", s.gate_abs);
    v->get("median_iterations", s.median_iterations);
    v->get("invasiveness", s.invasiveness);
    v->get("transfer_tolerance", s.transfer_tolerance);
    v->get("min_points", s.min_points);
    v->get("random_points", s.random_points);
    v->get("linear_h", s.linear_h);
    v->get("linear_settle", s.linear_settle);
    v->get("linear_rel_tol", s.linear_rel_tol);
    v->get("linear_ds", s.linear_ds);
    v->get("linear_ds_max", s.linear_ds_max);
    v->get("refine_h", s.refine_h);
    v->get("unstable_p", s.unstable_p);
    v->get("broyden_rel_tol", s.broyden_rel_tol);
    v->finish();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
  json chain = json::array();
  for (const auto& s : cfg.model.chain)
    chain.push_back({{"mass", s.mass}, {"damping", s.damping}, {"stiffness", s.stiffness}});
  const auto& b = cfg.chart.bisection;
  const auto& g = cfg.rig;
  const auto& n = cfg.nonlinear;
  const auto& v = cfg.validation;
  json j = {
      {"output", cfg.output},
      {"seed", cfg.seed},
      {"model",
       {{"storeys", cfg.model.storeys},
        {"chain", chain},
        {"interface_storey", cfg.model.interface_storey},
        {"mass_ratio", cfg.model.mass_ratio},
        {"tau", cfg.model.tau}}},
      {"chart",
       {{"tau_range", {cfg.chart.tau_min, cfg.chart.tau_max}},
        {"p_range", {cfg.chart.p_min, cfg.chart.p_max}},
        {"grid", {cfg.chart.tau_cells, cfg.chart.p_cells}},
        {"nodes", cfg.chart.nodes},
        {"boundaries", cfg.chart.boundaries},
        {"bisection",
         {{"seed_tau", b.seed_tau},
          {"seed_p", b.seed_p},
          {"seed_omega", b.seed_omega},
          {"depth", b.depth},
          {"tolerance", b.tolerance}}}}},
      {"rig",
       {{"shaker_gain", g.shaker_gain},
        {"actuator_lag", g.actuator_lag},
        {"displacement_noise", g.displacement_noise},
        {"force_noise", g.force_noise},
        {"kp", g.gains.kp},
        {"kd", g.gains.kd},
        {"kp_hat", g.kp_hat},
        {"kd_hat", g.kd_hat},
        {"forcing", g.forcing},
        {"h", g.h},
        {"settle_periods", g.settle_periods},
        {"measure_periods", g.measure_periods},
        {"steady_tolerance", g.steady_tolerance},
        {"max_extra_windows", g.max_extra_windows}}},
      {"frf",
       {{"mass_ratios", cfg.frf.mass_ratios},
        {"f_start_hz", cfg.frf.f_start},
        {"f_end_hz", cfg.frf.f_end},
        {"oracle_points", cfg.frf.oracle_points},
        {"solve", solve_json(cfg.frf.solve)}}},
      {"nonlinear",
       {{"mass_ratio", n.mass_ratio},
        {"preload", n.preload},
        {"soft_ratio", n.soft_ratio},
        {"gap", n.gap},
        {"f_start_hz", n.f_start},
        {"f_end_hz", n.f_end},
        {"h", n.h},
        {"from", n.from},
        {"refine_hz", n.refine_hz},
        {"refine_harmonics", n.refine_harmonics},
        {"refine_iterations", n.refine_iterations},
        {"sweep_oracle", n.sweep_oracle},
        {"sweep_step_hz", n.sweep_step_hz},
        {"sweep_h", n.sweep_h},
        {"solve", solve_json(n.solve)}}},
      {"validation",
       {{"checks", v.checks},
        {"boundary_p", v.boundary_p},
        {"boundary_tolerance", v.boundary_tolerance},
        {"scalar_tolerance", v.scalar_tolerance},
        {"fidelity_tolerance", v.fidelity_tolerance},
        {"gate_rel", v.gate_rel},
        {"gate_abs", v.gate_abs},
        {"median_iterations", v.median_iterations},
        {"invasiveness", v.invasiveness},
        {"transfer_tolerance", v.transfer_tolerance},
        {"min_points", v.min_points},
        {"random_points", v.random_points},
        {"linear_h", v.linear_h},
        {"linear_settle", v.linear_settle},
        {"linear_rel_tol", v.linear_rel_tol},
        {"linear_ds", v.linear_ds},
        {"linear_ds_max", v.linear_ds_max},
        {"refine_h", v.refine_h},
        {"unstable_p", v.unstable_p},
        {"broyden_rel_tol", v.broyden_rel_tol}}},
  };
  return j.dump(indent);
}

}  // namespace hybridlab
