#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "liejet/config.hpp"

namespace liejet {

struct ScenarioCheckResult {
  std::string label;
  double value = 0.0;
  double tol = 0.0;
  bool passed = false;
};

/// Bundled end-to-end system: a complete config document (the copyable
/// equivalent users can feed back through the CLI) plus reference checks
/// with recorded tolerances. Reference solutions are closed forms or
/// independently coded classical integrators; the check callbacks return a
/// residual to compare against tol.
struct Scenario {
  ConfigDocument config;
  std::string summary;

  using Check = std::function<double(const Scenario&, const Trajectory&)>;
  struct NamedCheck {
    std::string label;
    double tol = 0.0;
    Check residual;
  };
  std::vector<NamedCheck> checks;
};

/// Names of the bundled scenarios, in catalog order.
std::vector<std::string> scenario_names();

/// Fully populated scenario. Throws Error(kind=config) for unknown names.
Scenario scenario(const std::string& name);

struct ScenarioReport {
  std::string name;
  Trajectory trajectory;
  std::vector<ScenarioCheckResult> results;  // observable drifts, then checks
  bool passed = false;
};

/// Integrates the scenario and evaluates its conservation and reference
/// checks at the recorded tolerances.
ScenarioReport run_scenario(const Scenario& s);

// ---- independent classical references -------------------------------------
// Hand-coded fixed-step fourth-order integrators on the textbook equations;
// they share no machinery with the assembled dynamics and use the same time
// grid as integrate() so rows compare directly.

/// Free rigid body, I omega' = (I omega) x omega. Returns omega per grid row.
std::vector<std::array<double, 3>> classical_rigid_body(const std::array<double, 3>& inertia,
                                                        std::array<double, 3> omega0, double t0,
                                                        double t1, double h);

struct HeavyTopState {
  std::array<double, 3> omega{}, gamma{};
};

/// Heavy top in body coordinates:
///   I omega' = (I omega) x omega + mgl (gamma x chi),   gamma' = gamma x omega.
std::vector<HeavyTopState> classical_heavy_top(const std::array<double, 3>& inertia, double mgl,
                                               const std::array<double, 3>& chi, HeavyTopState s0,
                                               double t0, double t1, double h);

} // namespace liejet
