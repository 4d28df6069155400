#ifndef LIEJET_MORPHISM_HPP
#define LIEJET_MORPHISM_HPP

#include <span>
#include <string>
#include <vector>

#include "liejet/algebroid.hpp"
#include "liejet/dynamics.hpp"
#include "liejet/expr.hpp"
#include "liejet/jet.hpp"
#include "liejet/variational.hpp"

namespace liejet {

/// Morphism of Lie algebroids in local data: a base map with components
/// phi^{i'}(x1..xn) into the target base, and a fiberwise-linear map
/// Phi^{alpha'}_alpha(x1..xn). The defining property is that the pullback
/// commutes with the exterior differentials of the two algebroids; in
/// coordinates that splits into the two residual families check_morphism
/// samples (derivation: docs/math-notes.md):
///
///   anchor:  rho'^{i'}_{alpha'}(phi(x)) Phi^{alpha'}_alpha
///              = dphi^{i'}/dx^j rho^j_alpha,
///   bracket: Phi^{gamma'}_gamma C^gamma_{alpha beta}
///              - C'^{gamma'}_{alpha' beta'}(phi) Phi^{alpha'}_alpha Phi^{beta'}_beta
///              - rho^j_alpha dPhi^{gamma'}_beta/dx^j
///              + rho^j_beta dPhi^{gamma'}_alpha/dx^j = 0.
///
/// Construction validates shapes and that all entries read source base
/// coordinates only; whether the data satisfies the two conditions is
/// check_morphism's job, so deliberately broken fixtures stay constructible.
class Morphism {
public:
  Morphism(AlgebroidPtr source, AlgebroidPtr target, std::vector<Expr> phi,
           std::vector<std::vector<Expr>> Phi, std::string label = "");
  static Morphism from_strings(AlgebroidPtr source, AlgebroidPtr target,
                               const std::vector<std::string>& phi,
                               const std::vector<std::vector<std::string>>& Phi,
                               std::string label = "");
  static Morphism identity(AlgebroidPtr A);

  const LieAlgebroid& source() const { return *source_; }
  const LieAlgebroid& target() const { return *target_; }
  const AlgebroidPtr& source_ptr() const { return source_; }
  const AlgebroidPtr& target_ptr() const { return target_; }
  const std::string& label() const { return label_; }

  const Expr& base_expr(int ip) const;
  const Expr& fiber_expr(int ap, int a) const;

  /// phi(x) over base entries of any scalar shape (n' values).
  std::vector<Scalar> base_at(std::span<const Scalar> xs) const;
  /// Phi(x) as an m' x m grid of scalars.
  std::vector<std::vector<Scalar>> fiber_at(std::span<const Scalar> xs) const;

private:
  AlgebroidPtr source_, target_;
  std::vector<Expr> phi_;
  std::vector<std::vector<Expr>> Phi_;
  std::vector<BoundExpr> phi_bound_;
  std::vector<BoundExpr> Phi_bound_;  // row-major m' x m
  std::string label_;
};

/// outer after inner (inner applies first). The inner target and outer
/// source must agree dimensionally; entries compose symbolically.
Morphism compose(const Morphism& outer, const Morphism& inner);

/// Samples both defining conditions at plan.count base points of the source.
/// The report rows are "anchor compatibility" and "bracket compatibility",
/// in the same shape check_structure uses.
StructureReport check_morphism(const Morphism& M, const SamplePlan& plan = {},
                               double tol = 1e-9);

/// Order-preserving jet pushforward: the order-k jet of the composed curve
/// t -> (phi(x(t)), Phi(x(t)) y(t)) through the prolongation curve of P.
/// Commutes with truncation to any lower order.
JetVals push_jet(const Morphism& M, const JetVals& P);

/// Pullback of a Lagrangian on the target jet space through the jet
/// prolongation of the morphism: the returned source Lagrangian evaluates as
/// L_target after push_jet, built by substituting the target jet coordinates
/// with their closed-form expressions in source jet coordinates (level r+1 is
/// the symbolic total time derivative of level r). Solutions of the source
/// system project onto solutions of the target system when the fiber map is
/// surjective; that is what compare_reduction measures.
Lagrangian reduce_lagrangian(const Morphism& M, const Lagrangian& Ltarget);

/// Reduction diagnostic: integrate the pulled-back system upstairs, push
/// every state jet through the morphism, and integrate the target system
/// from the pushed initial state over the same grid. max_gap is the largest
/// entrywise difference between the pushed and the target states.
struct ReductionComparison {
  Trajectory source;  // pulled-back system, source coordinates
  Trajectory pushed;  // source states pushed through the morphism
  Trajectory target;  // target system from the pushed initial state
  double max_gap = 0.0;
};
ReductionComparison compare_reduction(const Morphism& M, const Lagrangian& Ltarget,
                                      std::span<const double> source_state0, double t0,
                                      double t1, double h);

/// Reconstruction of the base motion from a fiber curve: integrates
/// dx/dt = rho(x) xi(t) from x0 by RK4 with fixed step h (last step
/// shortened to land on t1). The returned trajectory carries base columns
/// only; the lifted pair (x(t), xi(t)) is then an admissible curve of A.
Trajectory reconstruct(const LieAlgebroid& A, const SectionAlongCurve& xi,
                       std::span<const double> x0, double t0, double t1, double h);

/// Reconstruction through a morphism: given a fiber curve xi'(t) of the
/// TARGET algebroid, recover the source base motion by integrating
///
///   dx/dt = rho_source(x) u(t, x),   Phi(x) u = xi'(t),
///
/// from x0 by RK4 (same grid convention as reconstruct). Requires a square
/// fiber map (source and target rank equal) that stays invertible along the
/// motion; a fiber solve with rcond below the dynamics regularity floor
/// aborts with a regularity error. With the identity morphism this reduces
/// to reconstruct.
Trajectory reconstruct_through(const Morphism& M, const SectionAlongCurve& xi_target,
                               std::span<const double> x0, double t0, double t1,
                               double h);

} // namespace liejet

#endif
