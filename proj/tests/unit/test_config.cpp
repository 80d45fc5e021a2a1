#include "doctest.h"

#include "hybridlab/config.hpp"
#include "hybridlab/io.hpp"

using namespace hybridlab;

TEST_CASE("default configuration survives a JSON round trip") {
  const std::string text = config_to_json(ExperimentConfig{});
  CHECK(config_to_json(parse_config(text)) == text);
}

TEST_CASE("partial configuration keeps the defaults") {
  const ExperimentConfig c = parse_config(R"({"frf": {"mass_ratios": [0.4]}, "seed": 9})");
  CHECK(c.frf.mass_ratios.size() == 1);
  CHECK(c.seed == 9);
  CHECK(c.rig.h == ExperimentConfig{}.rig.h);
}

TEST_CASE("unknown keys are rejected with their path") {
  try {
    parse_config(R"({"rig": {"gain": 3}})");
    FAIL("no exception");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("rig.gain") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"colour": 1})"), ValidationError);
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"nonlinear": {"from": "middle"}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"frf": {"mass_ratios": [1.2]}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"chart": {"nodes": 2}})"), ValidationError);
  CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
}

TEST_CASE("linear rig follows the model chain and mass ratio") {
  const ExperimentConfig c;
  const RigConfig r = c.linear_rig(0.33);
  CHECK(r.numeric.mu3 == doctest::Approx(0.33 * kReferenceInterfaceMass));
  CHECK(r.numeric.m3comp == r.numeric.mu3);
  CHECK(r.plant.storeys[2].stiffness == doctest::Approx(45052.0));
  const RigConfig nl = c.nonlinear_rig();
  CHECK(nl.plant.mode == RestoringMode::bilinear);
  CHECK(nl.plant.preload == doctest::Approx(26.68));
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
}
