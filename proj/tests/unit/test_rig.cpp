#include "doctest.h"

#include <cmath>

#include "hybridlab/rig.hpp"

using namespace hybridlab;

TEST_CASE("bilinear law is continuous at the break") {
  const BilinearLaw law = BilinearLaw::through_origin(30000.0, 45000.0, 1e-3);
  const double below = restoring_force(1e-3 - 1e-12, RestoringMode::bilinear, 0.0, law);
  const double above = restoring_force(1e-3, RestoringMode::bilinear, 0.0, law);
  CHECK(below == doctest::Approx(above).epsilon(1e-8));
  CHECK(restoring_force(0.0, RestoringMode::bilinear, 0.0, law) == 0.0);
  CHECK(restoring_force(2e-3, RestoringMode::linear, 45000.0, law) == doctest::Approx(90.0));
}

TEST_CASE("softening law puts the preloaded point a gap above the break") {
  const double P = 26.68, k = 45052.0, gap = 1e-4;
  const BilinearLaw law = BilinearLaw::softening_below(P, k, 0.7, gap);
  CHECK(law.k_minus == doctest::Approx(0.7 * k));
  CHECK(restoring_force(law.x_break + gap, RestoringMode::bilinear, 0.0, law) == doctest::Approx(P));
  CHECK_THROWS_AS(BilinearLaw::softening_below(P, k, 0.7, 1.0), ValidationError);
}

TEST_CASE("static equilibrium balances the preload in every leg") {
  const PlantConfig cfg = PlantConfig::reference_bilinear();
  const PlantState s = static_equilibrium(cfg);
  const auto a = plant_acceleration(cfg, s, cfg.preload);
  for (double x : a) CHECK(std::abs(x) < 1e-9);
  CHECK(s.x[0] == doctest::Approx(cfg.preload / cfg.storeys[0].stiffness));
}

TEST_CASE("implicit Euler step solves (I - hA) z' = z + h b") {
  NumSubConfig cfg = NumSubConfig::reference(0.5);
  cfg.h = 1e-3;
  const NumericalSubstructure sub(cfg);
  const NumState z(0.1, -0.2, 1e-3, 2e-3);
  const NumState next = sub.step(z, 3.0, -1.5);
  const Eigen::Matrix4d lhs = Eigen::Matrix4d::Identity() - cfg.h * sub.A();
  const NumState b(3.0 / cfg.mu3, -1.5 / cfg.mu4, 0.0, 0.0);
  CHECK((lhs * next - (z + cfg.h * b)).norm() < 1e-12);
  // F_num = F_comp - F_LC + F_ctrl
  CHECK((step_numeric(sub, z, 2.0, 4.0, -1.5, 1.0) - next).norm() < 1e-12);
}

TEST_CASE("shaker demand is a PD law on the target") {
  ControlTarget t;
  t.target = FourierSignal(10.0, 1);
  t.target.a(0) = 1e-3;
  t.gains = {100.0, 10.0};
  const double u = shaker_demand_at_phase(t, 2e-4, 0.01, 0.0);
  CHECK(u == doctest::Approx(100.0 * (1e-3 - 2e-4) + 10.0 * (0.0 - 0.01)));
  CHECK(numerical_grounding_force(1.0, 2.0, 0.5, 1.0, 10.0, 3.0) == doctest::Approx(8.0));
}

TEST_CASE("rig runs are reproducible for a fixed seed, noise included") {
  RigConfig rc;
  rc.numeric = NumSubConfig::reference(0.5);
  rc.plant.displacement_noise = 1e-7;
  rc.plant.force_noise = 1e-2;
  rc.settle_periods = 5;
  rc.max_extra_windows = 40;
  rc.steady_tolerance = 1e-2;
  ControlTarget t;
  t.target = FourierSignal(kTwoPi * 13.0, 1);
  t.target.a(0) = 1e-4;
  Rig a(rc), b(rc);
  const SteadyState sa = a.run_to_steady_state(t, t.target.omega);
  const SteadyState sb = b.run_to_steady_state(t, t.target.omega);
  CHECK(sa.x3.a(0) == sb.x3.a(0));
  CHECK(sa.xi3.b(0) == sb.xi3.b(0));
  a.reset();
  const SteadyState sc = a.run_to_steady_state(t, t.target.omega);
  CHECK(sc.x3.a(0) == sa.x3.a(0));
}

TEST_CASE("rig starts from the preloaded rest state") {
  RigConfig rc;
  rc.plant = PlantConfig::reference_bilinear();
  rc.numeric = NumSubConfig::reference(0.5);
  const Rig rig(rc);
  CHECK(rig.static_offset() == doctest::Approx(static_equilibrium(rc.plant).x[2]));
  CHECK(rig.numerical_state()(2) ==
        doctest::Approx(rig.static_offset() - rc.plant.preload / rc.numeric.kp_hat));
}
