#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "liejet/config.hpp"
#include "liejet/dynamics.hpp"

namespace liejet {

/// Knobs shared by the run_* entry points. Residual checks that carry no
/// tolerance of their own in the config document are judged against these
/// documented defaults.
struct RunOptions {
  /// Structure and operator-identity residuals.
  double tol = 1e-9;
  /// Trajectory-against-trajectory comparisons (pushforward gap,
  /// reconstruction round trip).
  double gap_tol = 1e-6;
  /// Euler-Lagrange residual along a trajectory. The top jet level is
  /// reconstructed by central differencing of the stored states, so this is
  /// an O(h^2) metric and the default is deliberately loose.
  double el_tol = 1e-4;
  /// Seed and count for every randomized sampling check.
  std::uint64_t seed = 1;
  int samples = 100;
};

/// One verdicted quantity: a nonnegative residual against the tolerance it
/// was judged by.
struct Verdict {
  std::string label;
  double value = 0.0;
  double tol = 0.0;
  bool passed = false;
};

/// Reciprocal-condition estimates of the fiber Hessian W. `floor` is the
/// threshold below which the dynamics refuse to advance.
struct RegularityInfo {
  double assembly_rcond = 0.0;
  std::optional<double> initial_rcond;  // at the configured initial state
  double floor = 0.0;
  bool passed = false;
};

/// Outcome of one runner command. Every verdict pairs a residual with the
/// tolerance it was judged against, so a verdict is always traceable.
/// `errors` records aborts (for example a regularity failure mid-run) that
/// ended the command early; any error forces `passed` to false.
struct RunReport {
  std::string command;
  std::string label;
  std::vector<Verdict> structure;      // algebroid structure residuals
  std::optional<RegularityInfo> regularity;
  std::vector<Verdict> conservation;   // observable drifts along the run
  std::optional<Verdict> el_residual;  // Euler-Lagrange residual along the run
  std::vector<Verdict> checks;         // morphism, operators, noether, reduction
  std::vector<std::string> errors;
  bool passed = true;

  /// Machine form. Deterministic: stable field order, no timestamps, no
  /// environment data, so identical inputs give byte-identical text.
  std::string json(int indent = 2) const;
  /// Human form: one line per verdict plus a final PASS/FAIL line.
  std::string text() const;
};

/// Structure checks for the configured algebroid (plus the morphism and its
/// target when present), the operator identity suite at the document's jet
/// order, the regularity estimate when a Lagrangian is present, and the
/// symmetry premise of a configured Noether section. No integration happens.
RunReport run_check(const ConfigDocument& doc, const RunOptions& opt = {});

/// Assembles and integrates the configured system, then reports conservation
/// drifts for every observable, the Euler-Lagrange residual along the
/// trajectory (top level reconstructed by central differences, never by
/// solving), and the Noether first-integral drift when configured. A missing
/// run section uses the RunSpec defaults. The trajectory is copied to
/// out_trajectory when given.
RunReport run_simulate(const ConfigDocument& doc, const RunOptions& opt = {},
                       Trajectory* out_trajectory = nullptr);

/// Reduction workflow over the document's morphism section: verifies the
/// morphism conditions (failure aborts the comparison), integrates the
/// pulled-back system upstairs and the target system downstairs, reports the
/// pushforward gap, and, for square fiber maps, reconstructs the source base
/// motion from the reduced solution and reports the round-trip error. The
/// pushed trajectory is copied to out_pushed when given.
RunReport run_reduce(const ConfigDocument& doc, const RunOptions& opt = {},
                     Trajectory* out_pushed = nullptr);

/// Operator identity suite over the catalog algebroids (tangent(2), so3,
/// heisenberg, and the heavy-top action algebroid) at jet orders 1..3.
RunReport run_operator_suite(const RunOptions& opt = {});

/// Runs one bundled scenario, or all of them when name is empty, at the
/// tolerances the scenarios themselves pin.
RunReport run_scenario_suite(const std::string& name = "");

} // namespace liejet
