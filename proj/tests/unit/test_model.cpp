#include "doctest.h"

#include <cmath>

#include "hybridlab/model.hpp"
#include "hybridlab/oracle.hpp"

using namespace hybridlab;

TEST_CASE("two-storey unit chain has frequencies sqrt((3 -+ sqrt5)/2)") {
  StoreyChainSpec chain;
  chain.storeys = {{1.0, 0.0, 1.0}, {1.0, 0.0, 1.0}};
  const Vector w = undamped_frequencies(assemble_true_assembly(chain));
  REQUIRE(w.size() == 2);
  CHECK(w(0) == doctest::Approx(std::sqrt((3.0 - std::sqrt(5.0)) / 2.0)).epsilon(1e-12));
  CHECK(w(1) == doctest::Approx(std::sqrt((3.0 + std::sqrt(5.0)) / 2.0)).epsilon(1e-12));
}

TEST_CASE("chain assembly is tridiagonal with summed leg terms") {
  const StoreyChainSpec chain = reference_building(4);
  const StructuralMatrices a = assemble_true_assembly(chain);
  const auto& s = chain.storeys;
  CHECK(a.K(0, 0) == doctest::Approx(s[0].stiffness + s[1].stiffness));
  CHECK(a.K(0, 1) == doctest::Approx(-s[1].stiffness));
  CHECK(a.K(3, 3) == doctest::Approx(s[3].stiffness));
  CHECK(a.C(2, 2) == doctest::Approx(s[2].damping + s[3].damping));
  CHECK(a.K(0, 2) == 0.0);
  CHECK(a.M(2, 2) == doctest::Approx(kReferenceInterfaceMass));
}

TEST_CASE("delayed model collapses to the true assembly") {
  const StoreyChainSpec chain = reference_building(4);
  const StructuralMatrices a = assemble_true_assembly(chain);
  for (double p : {0.2, 0.5, 0.9}) {
    const DelayedHybridModel m = storey_family(chain, 3)(1e-4, p);
    CHECK((m.M0 + m.Mt - a.M).norm() < 1e-12);
    CHECK((m.C0 + m.Ct - a.C).norm() < 1e-12);
    CHECK((m.K0 + m.Kt - a.K).norm() < 1e-9);
  }
}

TEST_CASE("five-storey reference adds a numerical storey") {
  const StoreyChainSpec five = reference_building(5);
  CHECK(five.size() == 5);
  CHECK(five.storeys[4].mass == doctest::Approx(five.storeys[0].mass));
  CHECK_THROWS_AS(reference_building(6), ValidationError);
}

TEST_CASE("partition rejects an interface outside the chain") {
  const StoreyChainSpec chain = reference_building(4);
  CHECK_THROWS_AS(PartitionSpec::at_storey(chain, 0, 0.5).validate(chain), ValidationError);
  CHECK_THROWS_AS(PartitionSpec::at_storey(chain, 5, 0.5).validate(chain), ValidationError);
  CHECK_THROWS_AS(storey_family(chain, 3)(1e-4, 1.5), ValidationError);
}
