#include "doctest.h"

#include <cmath>

#include "hybridlab/oracle.hpp"

using namespace hybridlab;

TEST_CASE("single-DoF FRF is F / (k - m w^2 + i c w)") {
  StructuralMatrices s;
  s.M = Matrix::Constant(1, 1, 2.0);
  s.C = Matrix::Constant(1, 1, 0.3);
  s.K = Matrix::Constant(1, 1, 800.0);
  const Vector f = Vector::Constant(1, 1.5);
  const ComplexFrf r = linear_frf(s, f, {5.0, 20.0, 40.0});
  for (std::size_t i = 0; i < 3; ++i) {
    const double w = r.omegas[i];
    const Complex x = 1.5 / Complex(800.0 - 2.0 * w * w, 0.3 * w);
    CHECK(std::abs(r.response[i](0) - x) < 1e-14);
  }
}

TEST_CASE("modal analysis of a single oscillator") {
  StructuralMatrices s;
  s.M = Matrix::Constant(1, 1, 2.0);
  s.C = Matrix::Constant(1, 1, 0.4);
  s.K = Matrix::Constant(1, 1, 800.0);
  const ModalResult m = modal_analysis(s);
  CHECK(m.natural_frequencies(0) == doctest::Approx(20.0).epsilon(1e-10));
  CHECK(m.damping_ratios(0) == doctest::Approx(0.4 / (2.0 * std::sqrt(1600.0))).epsilon(1e-8));
}

TEST_CASE("implicit Euler transfer tends to the continuous one as h shrinks") {
  NumSubConfig cfg = NumSubConfig::reference(0.5);
  const double w = kTwoPi * 13.0;
  cfg.h = 1e-7;
  const ComplexVector d = implicit_euler_transfer(cfg, w);
  const ComplexVector c = continuous_transfer(cfg, w);
  CHECK((d - c).norm() / c.norm() < 1e-4);
  cfg.h = 1e-4;
  const ComplexVector coarse = implicit_euler_transfer(cfg, w);
  CHECK((coarse - c).norm() > (d - c).norm());
}

TEST_CASE("phasor signal uses x = Re(X exp(i w t))") {
  const Complex X(0.3, -0.4);
  const FourierSignal s = phasor_signal(X, 2.0);
  for (double t : {0.0, 0.7, 1.9}) CHECK(s.value(2.0 * t) == doctest::Approx(std::real(X * std::exp(Complex(0, 2.0 * t)))));
}

TEST_CASE("fixed point reproduces the emulated assembly at the interface") {
  const PlantConfig plant = PlantConfig::reference();
  const NumSubConfig num = NumSubConfig::reference(0.5);
  const double w = kTwoPi * 13.0;
  const FixedPoint fp = linear_fixed_point(plant, num, PhysicalGains{}, w);
  Vector f = Vector::Zero(4);
  f(3) = num.forcing;
  const ComplexFrf r = linear_frf(rig_true_assembly(plant, num), f, {w});
  CHECK(std::abs(fp.interface - r.response[0](2)) < 1e-12 * std::abs(fp.interface));
}

TEST_CASE("monolithic sweep of the linear assembly follows the FRF") {
  const PlantConfig plant = PlantConfig::reference();
  NumSubConfig num = NumSubConfig::reference(0.5);
  num.h = 1e-4;
  std::vector<double> ws = {kTwoPi * 12.0, kTwoPi * 12.5};
  SweepSettings s;
  s.settle_periods = 200;
  const SweepResult r = nonlinear_sweep_frf(plant, num, ws, SweepDirection::up, s);
  Vector f = Vector::Zero(4);
  f(3) = num.forcing;
  const ComplexFrf o = linear_frf(rig_true_assembly(plant, num), f, ws);
  for (std::size_t i = 0; i < ws.size(); ++i)
    CHECK(r.points[i].amplitude == doctest::Approx(std::abs(o.response[i](2))).epsilon(1e-3));
}
