#pragma once

#include <optional>
#include <string>
#include <vector>

#include "liejet/dynamics.hpp"
#include "liejet/morphism.hpp"

namespace liejet {

/// Integration window for a simulation run.
struct RunSpec {
  double t0 = 0.0, t1 = 1.0, h = 1e-3;
};

/// Labeled function on the order-(2k-1) jet space whose drift along a
/// trajectory is monitored against tol.
struct Observable {
  std::string label;
  Expr expr;
  double tol = 1e-7;
};

/// Symmetry-candidate data: a section eta^alpha(x) of the bundle and an
/// optional boundary term F on the order-(k-1) jet space. The runner checks
/// the symmetry premise and monitors the resulting first integral.
struct NoetherSpec {
  std::vector<Expr> eta;
  Expr F;  // null = no boundary term
  double tol = 1e-9;
};

/// Reduction data: a morphism out of the configured algebroid and the
/// Lagrangian on its target whose pullback is being simulated.
struct MorphismSpec {
  Morphism map;
  std::optional<Lagrangian> target_lagrangian;
};

/// Parsed and validated form of one JSON system description. Sections
/// beyond the algebroid are optional so a single document type serves
/// structure checks, simulations and reduction comparisons.
struct ConfigDocument {
  std::string label;
  AlgebroidPtr algebroid;
  std::optional<Lagrangian> lagrangian;
  std::vector<double> initial;  // full order-(2k-1) state; empty = absent
  std::optional<RunSpec> run;
  std::vector<Observable> observables;
  std::optional<MorphismSpec> morphism;
  std::optional<NoetherSpec> noether;
};

/// Document layout (see docs/config-schema.md for the full schema):
///
///   {
///     "label": "...",
///     "algebroid": { "name": "...", "n": 2, "m": 2,
///                    "rho": [["1","0"],["0","exp(x1)"]],
///                    "c": [[2, 1, 2, "1"]] },
///     "lagrangian": { "k": 1, "expr": "0.5*(y1^2+y2^2)" },
///     "initial": { "x": [...], "y": [[...], ...] },
///     "run": { "t0": 0, "t1": 1, "h": 1e-3 },
///     "observables": [ { "label": "energy", "expr": "...", "tol": 1e-7 } ],
///     "morphism": { "target": <algebroid or shorthand>,
///                   "phi": ["..."], "Phi": [["...", ...], ...],
///                   "lagrangian": { "k": 1, "expr": "..." } },
///     "noether": { "eta": ["..."], "F": "...", "tol": 1e-9 }
///   }
///
/// The "c" triplets are 1-based [gamma, alpha, beta, expr] and are completed
/// antisymmetrically. An algebroid may also be the shorthand string
/// "tangent(n)", "so3" or "heisenberg". "initial.y" lists the fiber levels
/// y_1..y_{2k-1} in order, each of length m.
///
/// Throws Error(kind=parse) for malformed JSON or expression text and
/// Error(kind=config) for structural problems.
ConfigDocument parse_config(const std::string& json_text);

/// parse_config on the contents of the file at path.
ConfigDocument load_config(const std::string& path);

/// Serializes a document back to canonical JSON (stable field order, so
/// equal documents produce byte-identical text).
std::string config_json_string(const ConfigDocument& doc, int indent = 2);

} // namespace liejet
