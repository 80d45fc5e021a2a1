#include "doctest.h"

#include <cmath>
#include <random>

#include "hybridlab/continuation.hpp"
#include "hybridlab/oracle.hpp"

using namespace hybridlab;

TEST_CASE("Broyden update satisfies the secant condition") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Matrix J(5, 5);
    Vector du(5), dphi(5), w(5);
    for (int i = 0; i < 5; ++i) {
      du(i) = g(rng);
      dphi(i) = g(rng);
      w(i) = 0.5 + std::abs(g(rng));
      for (int j = 0; j < 5; ++j) J(i, j) = g(rng);
    }
    const Matrix plain = broyden_update(J, du, dphi);
    const Matrix weighted = broyden_update(J, du, dphi, w);
    CHECK((plain * du - dphi).norm() < 1e-12 * dphi.norm());
    CHECK((weighted * du - dphi).norm() < 1e-12 * dphi.norm());
    // Rank one: directions W-orthogonal to du are untouched.
    Vector v(5);
    for (int i = 0; i < 5; ++i) v(i) = g(rng);
    const Vector wdu = w.array().square() * du.array();
    v -= (wdu.dot(v) / wdu.dot(du)) * du;
    CHECK(((weighted - J) * v).norm() < 1e-12);
  }
}

TEST_CASE("target vector round trip") {
  FourierSignal s(40.0, 2);
  s.a << 1.0, 2.0;
  s.b << 3.0, 4.0;
  const Vector u = make_target_vector(s);
  REQUIRE(u.size() == 5);
  CHECK(target_omega(u) == 40.0);
  const FourierSignal back = target_signal(u, 2);
  CHECK(back.a(1) == 2.0);
  CHECK(back.b(0) == 3.0);
}

TEST_CASE("arclength row vanishes at the prediction") {
  const Vector u = Vector::LinSpaced(3, 1.0, 3.0);
  const Vector s = Vector::Ones(3).normalized();
  const Vector w = Vector::Constant(3, 2.0);
  CHECK(arclength_row(u, s, u, w) == 0.0);
  const Vector shifted = u + 0.1 * s;
  CHECK(arclength_row(u, s, shifted, w) == doctest::Approx(4.0 * 0.1 * s.squaredNorm()));
}

TEST_CASE("natural solve on the linear rig lands on the discrete fixed point") {
  RigConfig rc;
  rc.numeric = NumSubConfig::reference(0.5);
  rc.numeric.h = 1e-5;
  Rig rig(rc);
  SolveSettings s;
  const double w = kTwoPi * 12.5;
  const FrfBranch b = continue_frf(w, w, rig, s);
  REQUIRE(b.points.size() == 1);
  const FrfPoint& p = b.points.front();
  CHECK(p.residual_norm <= s.rel_tol * p.amplitude);
  CHECK(p.iterations <= 5);
  Vector f = Vector::Zero(4);
  f(3) = rc.numeric.forcing;
  const double exact = std::abs(linear_frf(rig_true_assembly(rc.plant, rc.numeric), f, {w}).response[0](2));
  CHECK(p.amplitude == doctest::Approx(exact).epsilon(0.01));
  CHECK(p.rms_ctrl < 0.01 * p.rms_lc);
}

TEST_CASE("solver trace records the Broyden secant updates") {
  RigConfig rc;
  rc.numeric = NumSubConfig::reference(0.67);
  Rig rig(rc);
  SolveSettings s;
  Vector u0 = Vector::Zero(3);
  u0(2) = kTwoPi * 13.0;
  const NewtonResult r = newton_solve(u0, rig, s);
  CHECK(r.converged);
  CHECK(r.fd_jacobians >= 1);
  for (const auto& rec : r.broyden)
    CHECK((rec.J_new * rec.du - rec.dphi).norm() <= 1e-12 * (rec.dphi.norm() + 1e-300));
}
