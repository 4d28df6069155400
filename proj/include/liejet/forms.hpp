#ifndef LIEJET_FORMS_HPP
#define LIEJET_FORMS_HPP

#include <vector>

#include "liejet/algebroid.hpp"
#include "liejet/jet.hpp"

namespace liejet {

/// Covector field on an order-k jet space, written in the standard dual
/// frame: level 0 holds the components along the base covectors X^alpha,
/// level r >= 1 the components along the r-th vertical covectors V^alpha_r.
///
/// Coefficients are jet functions. Taking total derivatives raises the jet
/// order a coefficient needs, so eval_order() may exceed degree(): the form
/// geometrically lives on the order-degree space but is evaluated through
/// the projection from a higher-order one. Comparisons and pairings sample
/// points of order max(degree, eval_order).
///
/// Holds a reference to its algebroid; the algebroid must outlive the form.
class OneForm {
public:
  OneForm() = default;
  /// Zero form: (degree+1) x m coefficient grid, all zero.
  OneForm(const LieAlgebroid& A, int degree);

  const LieAlgebroid& algebroid() const;
  int degree() const { return degree_; }
  /// Jet order needed to evaluate every coefficient.
  int eval_order() const;

  const FnPtr& coeff(int level, int alpha) const;
  /// Build-time mutation; forms are treated as immutable once built.
  void set_coeff(int level, int alpha, FnPtr f);

private:
  std::size_t index(int level, int alpha) const;
  const LieAlgebroid* A_ = nullptr;
  int degree_ = 0;
  std::vector<FnPtr> coeff_;
};

/// X^alpha for level 0, V^alpha_level for level >= 1.
OneForm basis_covector(const LieAlgebroid& A, int degree, int level, int alpha);

/// dF in the dual frame: level-0 component sum_i rho^i_alpha dF/dx^i,
/// level-r component dF/dy^alpha_r. degree must cover F's declared order;
/// the one-argument overload uses that order as the degree.
OneForm differential_of_function(const LieAlgebroid& A, const FnPtr& F, int degree);
OneForm differential_of_function(const LieAlgebroid& A, const FnPtr& F);

/// The same form regarded on a higher-order jet space (zero padding).
OneForm form_lift(const OneForm& a, int degree);
/// Linear combinations; operands of different degrees are lifted first.
OneForm form_add(const OneForm& a, const OneForm& b);
OneForm form_sub(const OneForm& a, const OneForm& b);
OneForm form_scale(double w, const OneForm& a);
/// Coefficient-wise multiplication by a jet function.
OneForm form_mul(const FnPtr& f, const OneForm& a);

/// Total time derivative of a form, applied `times` times: Leibniz on the
/// coefficients plus the frame rules
///   d_T X^alpha = V^alpha_1 - C^alpha_{beta gamma} y^beta_1 X^gamma,
///   d_T V^alpha_r = V^alpha_{r+1}.
/// Each application raises the degree by one.
OneForm form_dT(const OneForm& a, int times = 1);

/// Vertical endomorphism S on covectors. Defined on the frame by
/// S(X^alpha) = 0, S(V^alpha_1) = X^alpha and the recursion
/// S(V^alpha_r) = V^alpha_{r-1} + d_T(S(V^alpha_{r-1})) for r >= 2, then
/// extended by function-linearity. Keeps the degree; the top level of the
/// result is always zero. The defining property S(d_T^r theta) =
/// r d_T^{r-1} theta on basic forms theta is the test oracle.
OneForm vertical(const OneForm& a);
OneForm vertical_power(const OneForm& a, int p);

/// The integration-by-parts family
///   D_r(lambda) = sum_{j=r..k} (-1)^{j+r} (1/j!) d_T^{j-r}(S^j lambda),
/// k = lambda.degree(), mapping forms on E^k to forms on E^{2k-r}; r in
/// 0..k. D_0 is the variational operator (applied to dL it yields the
/// Euler-Lagrange covector), D_1 the Cartan operator (applied to dL, the
/// Cartan form).
OneForm operator_D(const OneForm& a, int r);
OneForm variational_operator(const OneForm& a);
OneForm cartan_operator(const OneForm& a);

/// All coefficients at the context's point, values[level][alpha].
std::vector<std::vector<double>> form_values(EvalContext& ctx, const OneForm& a);
/// max |coefficient value| at P over levels >= min_level.
double form_max_abs(const OneForm& a, const JetVals& P, int min_level = 0);

/// Pointwise operator identity suite at seeded random jets of order 2k:
/// the commutator S(d_T l) - d_T(S l) = l, nilpotency S^{k+1} = 0, the
/// defining property of S on basic forms, the D_r recursions, the relation
/// E = 1 - d_T S, S(d_T l) = l and E(d_T l) = 0, and the semibasic shape of
/// E(dL) and S(dL). Forms and Lagrangians are drawn pseudo-randomly from
/// plan.seed; one fresh draw per sample point.
StructureReport operator_identity_checks(const LieAlgebroid& A, int k,
                                         const SamplePlan& plan, double tol);

} // namespace liejet

#endif
