#ifndef LIEJET_VARIATIONAL_HPP
#define LIEJET_VARIATIONAL_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "liejet/algebroid.hpp"
#include "liejet/forms.hpp"
#include "liejet/jet.hpp"

namespace liejet {

struct LagrangianCache;
struct MomentaFamily;

/// Order-k Lagrangian: a function on the order-k jet space, given as an
/// expression in the coordinates x1..xn and y<alpha>_<r> with r <= k.
/// Reading a jet level above k is a config error; reading less than the full
/// level-k block is allowed (regularity is the dynamics module's concern).
///
/// Copies share one lazily built cache of derived data (momenta, the
/// Euler-Lagrange covector); the cache is read-only after first use.
class Lagrangian {
public:
  Lagrangian(AlgebroidPtr A, int order, Expr expr, std::string label = "");

  const LieAlgebroid& algebroid() const { return *A_; }
  const AlgebroidPtr& algebroid_ptr() const { return A_; }
  int order() const { return order_; }
  const Expr& expr() const { return expr_; }
  const std::string& label() const { return label_; }
  /// The Lagrangian as a jet function.
  const FnPtr& fn() const { return fn_; }

private:
  AlgebroidPtr A_;
  int order_ = 0;
  Expr expr_;
  std::string label_;
  FnPtr fn_;
  std::shared_ptr<LagrangianCache> cache_;
  friend const MomentaFamily& momenta(const Lagrangian&);
  friend const std::vector<FnPtr>& el_functions(const Lagrangian&);
};

/// Legendre coefficient functions p^r_alpha, r = 0..k-1, with pi_alpha =
/// p^0_alpha, built by the backward recursion
///   p^{k-1}_alpha = dL/dy^alpha_k,
///   p^{r-1}_alpha = dL/dy^alpha_r - d_T p^r_alpha.
/// Every level evaluates on jets of order 2k-1; level r already evaluates on
/// order 2k-1-r (see eval_order).
struct MomentaFamily {
  int k = 0;
  std::vector<std::vector<FnPtr>> p;  // p[r][alpha]
  const FnPtr& pi(int alpha) const { return p.at(0).at(std::size_t(alpha)); }
  /// Jet order level r actually reads.
  int eval_order(int r) const;
};

/// Momenta of L, built on first use and cached in L.
const MomentaFamily& momenta(const Lagrangian& L);

/// Components of the Euler-Lagrange covector as jet functions of order <= 2k:
///   deltaL_alpha = rho^i_alpha dL/dx^i - d_T pi_alpha
///                  - pi_gamma C^gamma_{alpha beta} y^beta_1.
/// A curve solves the Euler-Lagrange equations exactly when all components
/// vanish along its order-2k prolongation. Built on first use and cached.
const std::vector<FnPtr>& el_functions(const Lagrangian& L);

/// el_functions evaluated at P (jet order >= 2k).
std::vector<double> el_residual(const Lagrangian& L, const JetVals& P);

/// The same covector through the integration-by-parts route: the level-0
/// coefficients of the variational operator applied to dL. Kept as an
/// independent path; el_residual must agree with it.
std::vector<double> el_residual_by_parts(const Lagrangian& L, const JetVals& P);

/// Cartan form on the order 2k-1 jet space,
///   theta_L = pi_alpha X^alpha + sum_{r=1}^{k-1} p^r_alpha V^alpha_r,
/// which equals the Cartan operator applied to dL.
OneForm cartan_form(const Lagrangian& L);

/// Complete lift of the section eta = eta^alpha(x) e_alpha to the
/// order-`order` jet space, as frame coefficient functions:
///   eta^order = base[alpha] X_alpha + sum_r v[r-1][alpha] V^alpha_r,
///   v^alpha_r = d_T^{r-1}[ d_T eta^alpha + C^alpha_{beta gamma} y^beta_1 eta^gamma ].
/// Section components may read base coordinates only.
struct CompleteLift {
  std::vector<FnPtr> base;            // eta^alpha as jet functions
  std::vector<std::vector<FnPtr>> v;  // v[r-1][alpha], r = 1..order
};
CompleteLift complete_lift(const LieAlgebroid& A, const std::vector<Expr>& eta, int order);

/// Lift coefficients (eta^alpha; v^alpha_1..v^alpha_k) evaluated at P, in
/// level-major order, k = P.k(). P must be double-valued.
std::vector<double> complete_lift_coeffs(const LieAlgebroid& A, const std::vector<Expr>& eta,
                                         const JetVals& P);

/// Pairing of a form with the complete lift of eta at the form's degree, as a
/// jet function:
///   <lambda, eta^d> = lambda^0_alpha eta^alpha + sum_{r>=1} lambda^r_alpha v^alpha_r.
FnPtr pair_with_complete_lift(const OneForm& lambda, const std::vector<Expr>& eta);

/// Derivative of the jet function F along the complete lift of eta,
/// <dF, eta^order>. With F = L.fn() and order = L.order() this is the left
/// side of the Noether symmetry condition.
FnPtr lift_derivative(const LieAlgebroid& A, const FnPtr& F, int order,
                      const std::vector<Expr>& eta);

/// Section of E along a base curve: sigma(t) = sigma^alpha(t) e_alpha, given
/// by expressions in the reserved time variable t or by a Taylor-coefficient
/// sampler. Time dependence lives only here; Lagrangians stay autonomous.
class SectionAlongCurve {
public:
  /// sample(t, degree)[alpha][j] is the normalized Taylor coefficient
  /// sigma^alpha^(j)(t) / j! for j = 0..degree.
  using Sampler = std::function<std::vector<std::vector<double>>(double t, int degree)>;

  /// m expressions whose only free variable is t.
  static SectionAlongCurve from_expressions(std::vector<Expr> sigma);
  static SectionAlongCurve from_strings(const std::vector<std::string>& sigma);
  static SectionAlongCurve from_sampler(int m, Sampler sample);

  int m() const { return m_; }
  /// Component values at t.
  std::vector<double> values(double t) const;
  /// Components as degree-`degree` Taylor scalars centred at t (degree >= 1).
  std::vector<Scalar> taylor(double t, int degree) const;

private:
  SectionAlongCurve() = default;
  int m_ = 0;
  std::vector<Expr> sigma_;
  Sampler sample_;
};

/// Variational vector field at time t for the admissible curve whose order-k
/// jet at t is P (so k = P.k() and P must be double-valued). Returns the
/// n + k*m tangent components in jet slot order:
///   w^i = rho^i_alpha sigma^alpha,
///   v^alpha_r = (d/dt)^{r-1}[ sigma_dot^alpha + C^alpha_{beta gamma} a^beta sigma^gamma ],
/// the inner time derivatives taken with Taylor scalars along the curve
/// through P. sigma must be differentiable to order k at t. Matches the
/// complete-lift coefficients when sigma(t) = eta(gamma(t)).
std::vector<double> variational_field(const LieAlgebroid& A, const JetVals& P,
                                      const SectionAlongCurve& sigma, double t);

/// First-integral candidate from a symmetry of L:
///   G = F - <theta_L, eta^{2k-1}>,
/// constant along Euler-Lagrange solutions when the premise
/// d_{eta^k} L = d_T F holds. The premise is verified at plan.count sampled
/// jets of order k rather than trusted; G is returned either way, with
/// symmetry_ok reporting whether the worst residual stayed within tol.
struct NoetherResult {
  FnPtr integral;                  // G, order <= 2k-1
  double symmetry_residual = 0.0;  // max |d_{eta^k} L - d_T F| over the samples
  double tol = 0.0;
  bool symmetry_ok = false;
};

/// F may be null (no boundary term); otherwise it must live on the order k-1
/// jet space.
NoetherResult noether_integral(const Lagrangian& L, const std::vector<Expr>& eta, const FnPtr& F,
                               const SamplePlan& plan = {}, double tol = 1e-9);

} // namespace liejet

#endif
