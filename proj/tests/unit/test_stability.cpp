#include "doctest.h"

#include <cmath>

#include "hybridlab/model.hpp"
#include "hybridlab/stability.hpp"

using namespace hybridlab;

namespace {

// x'(t) = -x(t - tau)
DelayedHybridModel scalar(double tau) {
  DelayedHybridModel m;
  m.M0 = m.Mt = m.Ct = m.K0 = Matrix::Zero(1, 1);
  m.C0 = m.Kt = Matrix::Identity(1, 1);
  m.tau = tau;
  return m;
}

}  // namespace

TEST_CASE("scalar characteristic function is lambda + exp(-lambda tau)") {
  const DelayedHybridModel m = scalar(0.7);
  const Complex l(0.3, 1.1);
  const Complex d = char_fn(m, l);
  const Complex expect = l + std::exp(-l * 0.7);
  CHECK(std::abs(d - expect) < 1e-12);
}

TEST_CASE("rightmost collocation eigenvalue solves the scalar characteristic equation") {
  const DelayedHybridModel m = scalar(1.0);
  const Complex l = rightmost_eigenvalue(semidiscretize(m, 32));
  CHECK(std::abs(l + std::exp(-l)) < 1e-8);
  CHECK(l.real() < 0.0);
}

TEST_CASE("scalar stability boundary at tau = pi/2") {
  double lo = 1.0, hi = 2.0;
  for (int k = 0; k < 40; ++k) {
    const double mid = 0.5 * (lo + hi);
    (rightmost_eigenvalue(semidiscretize(scalar(mid), 32)).real() < 0.0 ? lo : hi) = mid;
  }
  CHECK(lo == doctest::Approx(kPi / 2).epsilon(1e-6));
}

TEST_CASE("time simulation agrees with the spectrum of the scalar equation") {
  const Vector q0 = Vector::Ones(1);
  const DdeSimulation stable = simulate_dde(scalar(1.0), q0, 60.0, 0.01);
  const DdeSimulation unstable = simulate_dde(scalar(2.0), q0, 60.0, 0.01);
  CHECK(stable.growth_rate < 0.0);
  CHECK(unstable.growth_rate > 0.0);
  // The envelope decays at the rightmost real part.
  const double re = rightmost_eigenvalue(semidiscretize(scalar(1.0), 32)).real();
  CHECK(stable.growth_rate == doctest::Approx(re).epsilon(0.05));
}

TEST_CASE("cell centres split the range evenly") {
  const auto c = cell_centres(0.0, 1.0, 4);
  REQUIRE(c.size() == 4);
  CHECK(c[0] == doctest::Approx(0.125));
  CHECK(c[3] == doctest::Approx(0.875));
}

TEST_CASE("small-delay limit of the reference building sits at p = 1/2") {
  const HybridFamily fam = storey_family(reference_building(4), 3);
  CHECK(asymptotic_boundary(fam) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(asymptotic_boundary(storey_family(reference_building(5), 3)) ==
        doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("chart labels follow the sign of the rightmost real part") {
  const HybridFamily fam = storey_family(reference_building(4), 3);
  const StabilityGrid g = stability_chart(fam, {5e-5, 2e-4}, {0.2, 0.8}, 24);
  REQUIRE(g.cells.size() == 4);
  for (const auto& c : g.cells) {
    if (c.label == CellLabel::stabilisable) CHECK(c.rightmost_re < 0.0);
    if (c.label == CellLabel::unstable) CHECK(c.rightmost_re >= 0.0);
  }
  CHECK(g.at(0, 0).label == CellLabel::unstable);
  CHECK(g.at(0, 1).label == CellLabel::stabilisable);
}

TEST_CASE("normalized residual is bounded and vanishes on a boundary point") {
  const HybridFamily fam = storey_family(reference_building(4), 3);
  SearchBox box;
  box.tau_min = 1e-4;
  box.tau_max = 1.5e-4;
  box.p_min = 0.5;
  box.p_max = 1.0;
  BisectionSettings s;
  s.seed_tau = 4;
  s.seed_p = 8;
  s.seed_omega = 40;
  s.depth = 4;
  const auto curves = find_oscillatory_boundaries(fam, box, s);
  std::size_t n = 0;
  for (const auto& c : curves)
    for (const auto& p : c.points) {
      ++n;
      const double r = normalized_char_residual(fam(p.tau, p.p), p.omega);
      CHECK(r >= 0.0);
      CHECK(r <= 1e-8);
    }
  const double off = normalized_char_residual(fam(1e-4, 0.7), 10.0);
  CHECK(off > 0.0);
  CHECK(off <= 1.0);
  MESSAGE(n << " boundary points");
}
