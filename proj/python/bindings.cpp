#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hybridlab/config.hpp"
#include "hybridlab/experiments.hpp"
#include "hybridlab/oracle.hpp"
#include "hybridlab/stability.hpp"
#include "hybridlab/validation.hpp"

namespace py = pybind11;
using namespace hybridlab;

namespace {

ExperimentConfig config_or_default(const std::string& json_text) {
  return json_text.empty() ? ExperimentConfig{} : parse_config(json_text);
}

py::dict branch_dict(const FrfBranch& b) {
  std::vector<double> f, a, res;
  std::vector<int> its;
  std::vector<bool> folds;
  for (const auto& p : b.points) {
    f.push_back(p.omega / kTwoPi);
    a.push_back(p.amplitude);
    res.push_back(p.residual_norm);
    its.push_back(p.iterations);
    folds.push_back(p.fold_flag);
  }
  py::dict d;
  d["f_hz"] = f;
  d["amplitude"] = a;
  d["residual"] = res;
  d["iterations"] = its;
  d["fold"] = folds;
  d["folds"] = b.fold_count();
  d["evaluations"] = b.evaluations;
  d["message"] = b.message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hybridlab, m) {
  m.doc() = "Delayed hybrid-test stability and control-based continuation";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<RigError>(m, "RigError", PyExc_RuntimeError);

  m.def("default_config", [] { return config_to_json(ExperimentConfig{}); },
        "Full default configuration as JSON text.");
  m.def("normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)); },
        py::arg("json_text"), "Parse, validate and re-emit a configuration.");

  m.def(
      "delayed_model",
      [](double tau, double p, int storeys) {
        const auto fam = storey_family(reference_building(storeys), kReferenceInterfaceStorey);
        const DelayedHybridModel md = fam(tau, p);
        py::dict d;
        d["M0"] = md.M0;
        d["Mt"] = md.Mt;
        d["C0"] = md.C0;
        d["Ct"] = md.Ct;
        d["K0"] = md.K0;
        d["Kt"] = md.Kt;
        d["tau"] = md.tau;
        return d;
      },
      py::arg("tau"), py::arg("p"), py::arg("storeys") = 4);

  m.def(
      "rightmost_eigenvalue",
      [](double tau, double p, int nodes, int storeys) {
        const auto fam = storey_family(reference_building(storeys), kReferenceInterfaceStorey);
        return rightmost_eigenvalue(semidiscretize(fam(tau, p), nodes));
      },
      py::arg("tau"), py::arg("p"), py::arg("nodes") = 32, py::arg("storeys") = 4,
      "Rightmost eigenvalue of the semi-discretized reference model.");

  m.def(
      "scalar_dde_rightmost",
      [](double tau, int nodes) {
        DelayedHybridModel md;
        md.M0 = md.Mt = md.Ct = md.K0 = Matrix::Zero(1, 1);
        md.C0 = md.Kt = Matrix::Identity(1, 1);
        md.tau = tau;
        return rightmost_eigenvalue(semidiscretize(md, nodes));
      },
      py::arg("tau"), py::arg("nodes") = 32, "x'(t) = -x(t - tau)");

  m.def(
      "stability_chart",
      [](const std::vector<double>& taus, const std::vector<double>& ps, int nodes, int storeys) {
        const auto fam = storey_family(reference_building(storeys), kReferenceInterfaceStorey);
        const StabilityGrid g = stability_chart(fam, taus, ps, nodes);
        Matrix re(taus.size(), ps.size());
        std::vector<std::vector<std::string>> labels(taus.size());
        for (std::size_t i = 0; i < taus.size(); ++i)
          for (std::size_t j = 0; j < ps.size(); ++j) {
            re(i, j) = g.at(i, j).rightmost_re;
            labels[i].push_back(to_string(g.at(i, j).label));
          }
        return py::make_tuple(re, labels);
      },
      py::arg("taus"), py::arg("ps"), py::arg("nodes") = 32, py::arg("storeys") = 4,
      "Rightmost real parts and labels, rows over tau, columns over p.");

  m.def(
      "assembly_frf",
      [](const std::vector<double>& f_hz, double p) {
        const RigConfig rc = ExperimentConfig{}.linear_rig(p);
        const StructuralMatrices truth = rig_true_assembly(rc.plant, rc.numeric);
        Vector force = Vector::Zero(4);
        force(3) = rc.numeric.forcing;
        std::vector<double> ws;
        for (double f : f_hz) ws.push_back(kTwoPi * f);
        std::vector<Complex> x3;
        for (const auto& x : linear_frf(truth, force, ws).response) x3.push_back(x(2));
        return x3;
      },
      py::arg("f_hz"), py::arg("p") = 0.5, "Storey-3 complex amplitude of the emulated assembly.");

  m.def(
      "implicit_euler_transfer",
      [](double p, double f_hz, double h) {
        NumSubConfig nc = NumSubConfig::reference(p);
        nc.h = h;
        return ComplexVector(implicit_euler_transfer(nc, kTwoPi * f_hz, true));
      },
      py::arg("p"), py::arg("f_hz"), py::arg("h") = 1e-4);

  m.def(
      "fourier_fit",
      [](const std::vector<double>& x, double h, double omega, int harmonics, int periods) {
        const FourierSignal s = extract_fourier(x, h, omega, harmonics, periods);
        return py::make_tuple(s.a0, Vector(s.a), Vector(s.b));
      },
      py::arg("samples"), py::arg("h"), py::arg("omega"), py::arg("harmonics"), py::arg("periods"),
      "Least-squares (a0, a, b) over whole periods starting at phase zero.");

  m.def(
      "solve_point",
      [](double f_hz, double p, double h, int harmonics) {
        RigConfig rc = ExperimentConfig{}.linear_rig(p);
        rc.numeric.h = h;
        Rig rig(rc);
        SolveSettings s;
        s.harmonics = harmonics;
        return branch_dict(continue_frf(kTwoPi * f_hz, kTwoPi * f_hz, rig, s));
      },
      py::arg("f_hz"), py::arg("p") = 0.5, py::arg("h") = 1e-4, py::arg("harmonics") = 1,
      "Single natural solve on the linear rig.");

  m.def(
      "run_chart",
      [](const std::string& json_text, const std::string& out) {
        ChartRun r;
        {
          py::gil_scoped_release release;
          r = run_chart(config_or_default(json_text), out);
        }
        std::vector<double> re;
        std::vector<std::string> labels;
        for (const auto& c : r.grid.cells) {
          re.push_back(c.rightmost_re);
          labels.push_back(to_string(c.label));
        }
        py::dict d;
        d["taus"] = r.grid.taus;
        d["ps"] = r.grid.ps;
        d["rightmost_re"] = re;
        d["labels"] = labels;
        d["boundary_curves"] = r.boundaries.size();
        d["files"] = r.files;
        return d;
      },
      py::arg("config_json") = "", py::arg("out") = "");

  m.def(
      "run_frf",
      [](const std::string& json_text, const std::string& out) {
        FrfRun r;
        {
          py::gil_scoped_release release;
          r = run_frf(config_or_default(json_text), out);
        }
        py::list cases;
        for (const auto& c : r.cases) {
          py::dict d = branch_dict(c.branch);
          d["mass_ratio"] = c.mass_ratio;
          d["oracle_amplitude"] = c.oracle_amplitude;
          cases.append(d);
        }
        return cases;
      },
      py::arg("config_json") = "", py::arg("out") = "");

  m.def(
      "run_validation",
      [](const std::string& json_text, const std::vector<int>& checks, const std::string& out) {
        ExperimentConfig cfg = config_or_default(json_text);
        if (!checks.empty()) cfg.validation.checks = checks;
        ValidationReport rep;
        {
          py::gil_scoped_release release;
          rep = run_validation(cfg, out);
        }
        py::list rows;
        for (const auto& c : rep.checks) {
          py::dict d;
          d["id"] = c.id;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["detail"] = c.detail;
          d["seconds"] = c.seconds;
          d["seed"] = c.seed;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config_json") = "", py::arg("checks") = std::vector<int>{}, py::arg("out") = "");

  m.attr("__version__") = HYBRIDLAB_VERSION;
}
