#ifndef LIEJET_JET_HPP
#define LIEJET_JET_HPP

#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "liejet/algebroid.hpp"
#include "liejet/expr.hpp"
#include "liejet/rng.hpp"
#include "liejet/scalar.hpp"

namespace liejet {

// Slot layout of an order-k jet over a rank-m algebroid with n-dimensional
// base:
//   slot i               -> x_{i+1}        0 <= i < n
//   slot n + (r-1)m + a  -> y^{a+1}_r      1 <= r <= k, 0 <= a < m
// The order-k layout is a prefix of every higher-order layout, so a function
// bound at order k evaluates unchanged at points of any order >= k.
inline int jet_slot_count(int n, int m, int k) { return n + k * m; }
inline int jet_x_slot(int i) { return i; }
inline int jet_y_slot(int n, int m, int r, int alpha) { return n + (r - 1) * m + alpha; }
/// 0 for base slots, r for velocity slots of level r.
inline int jet_slot_level(int n, int m, int slot) {
  return slot < n ? 0 : (slot - n) / m + 1;
}
/// Canonical 1-based coordinate name: "x3", "y2_4".
std::string jet_slot_name(int n, int m, int slot);

/// One jet's worth of coordinate entries, any scalar shape. Order 0 (a bare
/// base point) is allowed; it shows up for curves of base functions.
class JetVals {
public:
  JetVals() = default;
  /// Zero-filled entries.
  JetVals(int n, int m, int k);
  JetVals(int n, int m, int k, std::span<const double> entries);

  int n() const { return n_; }
  int m() const { return m_; }
  int k() const { return k_; }
  int size() const { return static_cast<int>(q_.size()); }

  std::span<const Scalar> slots() const { return q_; }
  const Scalar& at(int slot) const { return q_[check(slot)]; }
  Scalar& at(int slot) { return q_[check(slot)]; }
  const Scalar& x(int i) const { return at(jet_x_slot(i)); }
  Scalar& x(int i) { return at(jet_x_slot(i)); }
  const Scalar& y(int r, int alpha) const { return at(jet_y_slot(n_, m_, r, alpha)); }
  Scalar& y(int r, int alpha) { return at(jet_y_slot(n_, m_, r, alpha)); }

  /// Entries as doubles; shape error unless every entry is a plain double.
  std::vector<double> to_doubles() const;

private:
  std::size_t check(int slot) const;
  int n_ = 0, m_ = 0, k_ = 0;
  std::vector<Scalar> q_;
};

/// Uniformly sampled double-valued jet, every entry in [lo, hi].
JetVals sample_jet(int n, int m, int k, Rng& rng, double lo, double hi);

/// Sampled jet whose base entries follow plan.box and velocity entries
/// plan.fiber_box.
JetVals sample_plan_jet(const LieAlgebroid& A, int order, const SamplePlan& plan, Rng& rng);

/// Degree-D Taylor prolongation curve through P, truncated to jet order k0.
/// Velocity levels expand as y_r(t) = sum_s y_{r+s} t^s / s!; the base point
/// integrates dx/dt = rho(x) y_1(t) by Picard iteration. Requires
/// P.k() >= k0 + D. Entry shapes of P are arbitrary; the curve entries are
/// Taylor scalars of degree D over them.
JetVals jet_curve(const LieAlgebroid& A, const JetVals& P, int k0, int D);

// ---- functions on jet spaces ----------------------------------------------

class FnNode;
/// Functions form immutable DAGs; subterm sharing is what the per-point
/// memoization in EvalContext exploits.
using FnPtr = std::shared_ptr<const FnNode>;

enum class FnKind {
  constant,
  coordinate,
  expression,
  weighted_sum,
  product,
  total_derivative,
  partial
};

/// A scalar function on jets of one algebroid. Built only through the
/// factories below and immutable afterwards. `order` is an upper bound on
/// the jet order the function reads; evaluation needs a point of at least
/// that order. Constants carry m == 0 and attach to any system.
struct FnNode {
  FnKind kind;
  int n = 0, m = 0;
  int order = 0;
  double value = 0.0;           // constant
  int slot = -1;                // coordinate / partial direction
  int deriv = 0;                // total_derivative: number of applications
  BoundExpr bound;              // expression
  std::vector<FnPtr> kids;
  std::vector<double> weights;  // weighted_sum, parallel to kids
};

FnPtr fn_constant(double value);
FnPtr fn_coordinate(int n, int m, int slot);
FnPtr fn_x(int n, int m, int i);
FnPtr fn_y(int n, int m, int r, int alpha);
/// Binds an expression over x1..xn, y<alpha>_<r> (bare y<alpha> means level
/// 1). Unknown names are config errors; constant expressions fold.
FnPtr fn_expression(int n, int m, const Expr& e);
/// sum_i weights[i] * terms[i]. Flattens nested sums, folds constants and
/// drops zero terms, so the returned node may be any kind.
FnPtr fn_sum(std::vector<FnPtr> terms, std::vector<double> weights);
FnPtr fn_add(const FnPtr& a, const FnPtr& b);
FnPtr fn_sub(const FnPtr& a, const FnPtr& b);
FnPtr fn_scale(double w, const FnPtr& f);
/// Flattens nested products and folds constant factors; a zero factor
/// collapses the product.
FnPtr fn_product(std::vector<FnPtr> factors);
FnPtr fn_mul(const FnPtr& a, const FnPtr& b);
/// Total time derivative along prolongations, applied `r` times. Linear
/// structure is rewritten at construction: sums distribute, nested
/// applications merge, velocity coordinates shift level directly.
FnPtr fn_total_derivative(const FnPtr& f, int r = 1);
/// Partial derivative in one jet coordinate. Slots beyond f's order give the
/// zero constant, as do expression nodes that never read the slot.
FnPtr fn_partial(const FnPtr& f, int slot);

/// Per-point evaluator with node memoization. Derivative nodes evaluate on
/// derived points (Taylor curves, perturbation-seeded copies); each derived
/// point gets a child context so shared subterms are still computed once.
/// The memo shares ownership of evaluated nodes, so transient function trees
/// are safe; the algebroid and the point must outlive the context.
class EvalContext {
public:
  EvalContext(const LieAlgebroid& A, const JetVals& P) : A_(A), P_(P) {}
  EvalContext(const EvalContext&) = delete;
  EvalContext& operator=(const EvalContext&) = delete;

  const LieAlgebroid& algebroid() const { return A_; }
  const JetVals& point() const { return P_; }

  Scalar eval(const FnPtr& f);

private:
  Scalar eval_node(const FnNode* f);
  EvalContext& curve_context(int k0, int degree);
  EvalContext& seeded_context(int slot);

  struct Child {
    JetVals point;
    std::unique_ptr<EvalContext> ctx;
  };

  const LieAlgebroid& A_;
  const JetVals& P_;
  std::map<FnPtr, Scalar> memo_; // shared ownership: entries pin their nodes
  std::map<std::pair<int, int>, Child> curves_; // (k0, degree)
  std::map<int, Child> seeded_;                 // seeded slot
};

/// One-off evaluation; builds a fresh context.
Scalar eval_at(const FnPtr& f, const LieAlgebroid& A, const JetVals& P);

} // namespace liejet

#endif
