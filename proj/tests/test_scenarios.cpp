#include <cmath>
#include <string>

#include "doctest.h"
#include "liejet/error.hpp"
#include "liejet/scenarios.hpp"

using namespace liejet;

TEST_CASE("the catalog lists seven scenarios and rejects unknown names") {
  const std::vector<std::string> names = scenario_names();
  REQUIRE(names.size() == 7);
  for (const auto& name : names) {
    const Scenario s = scenario(name);
    CHECK(s.config.label == name);
    CHECK(s.config.lagrangian.has_value());
    CHECK(s.config.run.has_value());
    CHECK_FALSE(s.config.initial.empty());
    CHECK_FALSE(s.checks.empty());
    CHECK_FALSE(s.summary.empty());
  }
  CHECK_THROWS_AS(scenario("pendulum"), Error);
}

TEST_CASE("every scenario emits a config equivalent that round-trips") {
  for (const auto& name : scenario_names()) {
    const Scenario s = scenario(name);
    INFO(name);
    const std::string text = config_json_string(s.config);
    const ConfigDocument doc = parse_config(text);
    CHECK(config_json_string(doc) == text);
    CHECK(doc.algebroid->n() == s.config.algebroid->n());
    CHECK(doc.algebroid->m() == s.config.algebroid->m());
    CHECK(doc.initial == s.config.initial);
    CHECK(doc.observables.size() == s.config.observables.size());
    CHECK(doc.morphism.has_value() == s.config.morphism.has_value());
    CHECK(doc.noether.has_value() == s.config.noether.has_value());
  }
}

TEST_CASE("the independent rigid-body reference conserves its own invariants") {
  const auto rows = classical_rigid_body({1.0, 2.0, 3.0}, {0.3, 1.0, -0.2}, 0.0, 1.0, 1e-3);
  REQUIRE(rows.size() == 1001);
  const auto energy = [](const std::array<double, 3>& w) {
    return 0.5 * (w[0] * w[0] + 2 * w[1] * w[1] + 3 * w[2] * w[2]);
  };
  const auto casimir = [](const std::array<double, 3>& w) {
    return w[0] * w[0] + 4 * w[1] * w[1] + 9 * w[2] * w[2];
  };
  for (const auto& w : rows) {
    CHECK(std::abs(energy(w) - energy(rows.front())) <= 1e-10);
    CHECK(std::abs(casimir(w) - casimir(rows.front())) <= 1e-10);
  }
}

TEST_CASE("all bundled scenarios pass their recorded checks") {
  for (const auto& name : scenario_names()) {
    const Scenario s = scenario(name);
    const ScenarioReport rep = run_scenario(s);
    CHECK(rep.name == name);
    CHECK(rep.trajectory.size() > 1);
    REQUIRE_FALSE(rep.results.empty());
    for (const auto& r : rep.results) {
      INFO(name, ": ", r.label, " value ", r.value, " tol ", r.tol);
      CHECK(r.passed);
    }
    CHECK(rep.passed);
  }
}
