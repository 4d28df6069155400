#include "liejet/forms.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <utility>

#include "liejet/error.hpp"

namespace liejet {

namespace {

const FnPtr& zero_fn() {
  static const FnPtr z = fn_constant(0.0);
  return z;
}

bool is_zero_fn(const FnPtr& f) { return f->kind == FnKind::constant && f->value == 0.0; }

int factorial(int r) {
  int f = 1;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

} // namespace

OneForm::OneForm(const LieAlgebroid& A, int degree) : A_(&A), degree_(degree) {
  if (degree < 0) throw_invalid("form degree must be >= 0");
  coeff_.assign(std::size_t(degree + 1) * std::size_t(A.m()), zero_fn());
}

const LieAlgebroid& OneForm::algebroid() const {
  if (!A_) throw_invalid("empty form");
  return *A_;
}

int OneForm::eval_order() const {
  int k = 0;
  for (const FnPtr& f : coeff_) k = std::max(k, f->order);
  return k;
}

std::size_t OneForm::index(int level, int alpha) const {
  if (!A_) throw_invalid("empty form");
  if (level < 0 || level > degree_ || alpha < 0 || alpha >= A_->m())
    throw_invalid("form component (" + std::to_string(level) + ", " + std::to_string(alpha) +
                  ") out of range");
  return std::size_t(level) * std::size_t(A_->m()) + std::size_t(alpha);
}

const FnPtr& OneForm::coeff(int level, int alpha) const { return coeff_[index(level, alpha)]; }

void OneForm::set_coeff(int level, int alpha, FnPtr f) {
  const std::size_t i = index(level, alpha);
  if (!f) throw_invalid("null form coefficient");
  if (f->m != 0 && (f->n != A_->n() || f->m != A_->m()))
    throw_shape("form coefficient belongs to a different jet space");
  coeff_[i] = std::move(f);
}

OneForm basis_covector(const LieAlgebroid& A, int degree, int level, int alpha) {
  OneForm out(A, degree);
  out.set_coeff(level, alpha, fn_constant(1.0));
  return out;
}

OneForm differential_of_function(const LieAlgebroid& A, const FnPtr& F, int degree) {
  if (!F) throw_invalid("null function");
  if (F->m != 0 && (F->n != A.n() || F->m != A.m()))
    throw_shape("function belongs to a different jet space");
  if (F->order > degree)
    throw_config("differential of an order-" + std::to_string(F->order) +
                 " function needs a space of at least that order");
  const int n = A.n(), m = A.m();
  OneForm out(A, degree);
  for (int alpha = 0; alpha < m; ++alpha) {
    std::vector<FnPtr> terms;
    for (int i = 0; i < n; ++i) {
      FnPtr dFi = fn_partial(F, jet_x_slot(i));
      if (is_zero_fn(dFi)) continue;
      terms.push_back(fn_mul(fn_expression(n, m, A.rho_expr(i, alpha)), dFi));
    }
    if (!terms.empty())
      out.set_coeff(0, alpha, fn_sum(std::move(terms), std::vector<double>(terms.size(), 1.0)));
    for (int r = 1; r <= degree; ++r)
      out.set_coeff(r, alpha, fn_partial(F, jet_y_slot(n, m, r, alpha)));
  }
  return out;
}

OneForm differential_of_function(const LieAlgebroid& A, const FnPtr& F) {
  if (!F) throw_invalid("null function");
  return differential_of_function(A, F, F->order);
}

OneForm form_lift(const OneForm& a, int degree) {
  if (degree < a.degree()) throw_invalid("cannot lower a form's degree");
  if (degree == a.degree()) return a;
  OneForm out(a.algebroid(), degree);
  for (int r = 0; r <= a.degree(); ++r)
    for (int alpha = 0; alpha < a.algebroid().m(); ++alpha)
      out.set_coeff(r, alpha, a.coeff(r, alpha));
  return out;
}

OneForm form_add(const OneForm& a, const OneForm& b) {
  if (&a.algebroid() != &b.algebroid()) throw_shape("forms live on different algebroids");
  const int d = std::max(a.degree(), b.degree());
  const int m = a.algebroid().m();
  OneForm out(a.algebroid(), d);
  for (int r = 0; r <= d; ++r)
    for (int alpha = 0; alpha < m; ++alpha) {
      const FnPtr& fa = r <= a.degree() ? a.coeff(r, alpha) : zero_fn();
      const FnPtr& fb = r <= b.degree() ? b.coeff(r, alpha) : zero_fn();
      out.set_coeff(r, alpha, fn_add(fa, fb));
    }
  return out;
}

OneForm form_sub(const OneForm& a, const OneForm& b) { return form_add(a, form_scale(-1.0, b)); }

OneForm form_scale(double w, const OneForm& a) {
  OneForm out(a.algebroid(), a.degree());
  for (int r = 0; r <= a.degree(); ++r)
    for (int alpha = 0; alpha < a.algebroid().m(); ++alpha)
      out.set_coeff(r, alpha, fn_scale(w, a.coeff(r, alpha)));
  return out;
}

OneForm form_mul(const FnPtr& f, const OneForm& a) {
  if (!f) throw_invalid("null function");
  OneForm out(a.algebroid(), a.degree());
  for (int r = 0; r <= a.degree(); ++r)
    for (int alpha = 0; alpha < a.algebroid().m(); ++alpha)
      out.set_coeff(r, alpha, fn_mul(f, a.coeff(r, alpha)));
  return out;
}

namespace {

OneForm form_dT_once(const OneForm& a) {
  const LieAlgebroid& A = a.algebroid();
  const int n = A.n(), m = A.m(), D = a.degree();
  OneForm out(A, D + 1);
  for (int gamma = 0; gamma < m; ++gamma) {
    // level 0: d_T(l^0_gamma) - sum_{alpha,beta} l^0_alpha C^alpha_{beta gamma} y^beta_1
    std::vector<FnPtr> terms;
    std::vector<double> weights;
    if (!is_zero_fn(a.coeff(0, gamma))) {
      terms.push_back(fn_total_derivative(a.coeff(0, gamma)));
      weights.push_back(1.0);
    }
    for (int alpha = 0; alpha < m; ++alpha) {
      if (is_zero_fn(a.coeff(0, alpha))) continue;
      for (int beta = 0; beta < m; ++beta) {
        const Expr& c = A.c_expr(alpha, beta, gamma);
        if (!c) continue;
        terms.push_back(
            fn_product({fn_expression(n, m, c), fn_y(n, m, 1, beta), a.coeff(0, alpha)}));
        weights.push_back(-1.0);
      }
    }
    if (!terms.empty()) out.set_coeff(0, gamma, fn_sum(std::move(terms), std::move(weights)));
    // level s in 1..D: l^{s-1}_gamma + d_T(l^s_gamma); level D+1: l^D_gamma
    for (int s = 1; s <= D; ++s)
      out.set_coeff(s, gamma, fn_add(a.coeff(s - 1, gamma), fn_total_derivative(a.coeff(s, gamma))));
    out.set_coeff(D + 1, gamma, a.coeff(D, gamma));
  }
  return out;
}

} // namespace

OneForm form_dT(const OneForm& a, int times) {
  if (times < 0) throw_invalid("negative derivative count");
  OneForm out = a;
  for (int t = 0; t < times; ++t) out = form_dT_once(out);
  return out;
}

OneForm vertical(const OneForm& a) {
  const LieAlgebroid& A = a.algebroid();
  const int K = a.degree(), m = A.m();
  OneForm out(A, K);
  if (K == 0) return out;
  // frame images S(V^alpha_r) via S(V^alpha_1) = X^alpha and
  // S(V^alpha_r) = V^alpha_{r-1} + d_T(S(V^alpha_{r-1}))
  std::vector<std::vector<OneForm>> img(std::size_t(K) + 1);
  img[1].reserve(std::size_t(m));
  for (int alpha = 0; alpha < m; ++alpha) img[1].push_back(basis_covector(A, 0, 0, alpha));
  for (int r = 2; r <= K; ++r) {
    img[std::size_t(r)].reserve(std::size_t(m));
    for (int alpha = 0; alpha < m; ++alpha)
      img[std::size_t(r)].push_back(
          form_add(basis_covector(A, r - 1, r - 1, alpha), form_dT(img[std::size_t(r) - 1][std::size_t(alpha)])));
  }
  for (int r = 1; r <= K; ++r)
    for (int alpha = 0; alpha < m; ++alpha) {
      if (is_zero_fn(a.coeff(r, alpha))) continue;
      out = form_add(out, form_mul(a.coeff(r, alpha),
                                   form_lift(img[std::size_t(r)][std::size_t(alpha)], K)));
    }
  return out;
}

OneForm vertical_power(const OneForm& a, int p) {
  if (p < 0) throw_invalid("negative vertical power");
  OneForm out = a;
  for (int i = 0; i < p; ++i) out = vertical(out);
  return out;
}

OneForm operator_D(const OneForm& a, int r) {
  const int k = a.degree();
  if (r < 0 || r > k) throw_invalid("operator family index must lie in 0..degree");
  OneForm acc(a.algebroid(), 2 * k - r);
  OneForm Sj = vertical_power(a, r);
  for (int j = r; j <= k; ++j) {
    const double w = ((j + r) % 2 == 0 ? 1.0 : -1.0) / factorial(j);
    acc = form_add(acc, form_scale(w, form_dT(Sj, j - r)));
    if (j < k) Sj = vertical(Sj);
  }
  return acc;
}

OneForm variational_operator(const OneForm& a) { return operator_D(a, 0); }

OneForm cartan_operator(const OneForm& a) { return operator_D(a, 1); }

std::vector<std::vector<double>> form_values(EvalContext& ctx, const OneForm& a) {
  if (&ctx.algebroid() != &a.algebroid())
    throw_shape("context and form belong to different algebroids");
  const int m = a.algebroid().m();
  std::vector<std::vector<double>> vals(std::size_t(a.degree()) + 1,
                                        std::vector<double>(std::size_t(m), 0.0));
  for (int r = 0; r <= a.degree(); ++r)
    for (int alpha = 0; alpha < m; ++alpha)
      vals[std::size_t(r)][std::size_t(alpha)] = ctx.eval(a.coeff(r, alpha)).as_double();
  return vals;
}

namespace {

double max_abs_in_ctx(EvalContext& ctx, const OneForm& a, int min_level) {
  double worst = 0.0;
  for (int r = std::max(0, min_level); r <= a.degree(); ++r)
    for (int alpha = 0; alpha < a.algebroid().m(); ++alpha)
      worst = std::max(worst, std::abs(ctx.eval(a.coeff(r, alpha)).as_double()));
  return worst;
}

} // namespace

double form_max_abs(const OneForm& a, const JetVals& P, int min_level) {
  EvalContext ctx(a.algebroid(), P);
  return max_abs_in_ctx(ctx, a, min_level);
}

// ---- identity suite --------------------------------------------------------

namespace {

Expr random_factor(const std::vector<std::string>& vars, Rng& rng) {
  Expr v = expr_variable(vars[std::size_t(rng.next_below(int(vars.size())))]);
  switch (rng.next_below(4)) {
    case 0: return v;
    case 1: return expr_call(Elementary::sin_fn, v);
    case 2: return expr_call(Elementary::cos_fn, v);
    default:
      return expr_binary(ExprOp::mul, v,
                         expr_variable(vars[std::size_t(rng.next_below(int(vars.size())))]));
  }
}

/// Smooth pseudo-random function on the order-`order` jet space: a constant
/// plus two weighted polynomial/trig terms in the jet coordinates.
FnPtr random_coefficient(const LieAlgebroid& A, int order, Rng& rng) {
  std::vector<std::string> vars;
  for (int s = 0; s < jet_slot_count(A.n(), A.m(), order); ++s)
    vars.push_back(jet_slot_name(A.n(), A.m(), s));
  Expr e = expr_number(rng.uniform(-1.0, 1.0));
  if (!vars.empty())
    for (int t = 0; t < 2; ++t)
      e = expr_binary(ExprOp::add, e,
                      expr_binary(ExprOp::mul, expr_number(rng.uniform(-1.0, 1.0)),
                                  random_factor(vars, rng)));
  return fn_expression(A.n(), A.m(), e);
}

OneForm random_form(const LieAlgebroid& A, int degree, Rng& rng) {
  OneForm out(A, degree);
  for (int r = 0; r <= degree; ++r)
    for (int alpha = 0; alpha < A.m(); ++alpha)
      out.set_coeff(r, alpha, random_coefficient(A, degree, rng));
  return out;
}

/// Regular in the top velocities (quadratic block) plus a random lower part.
FnPtr random_lagrangian(const LieAlgebroid& A, int k, Rng& rng) {
  std::vector<FnPtr> terms;
  for (int alpha = 0; alpha < A.m(); ++alpha) {
    FnPtr yk = fn_y(A.n(), A.m(), k, alpha);
    terms.push_back(fn_mul(yk, yk));
  }
  FnPtr quad = fn_sum(std::move(terms), std::vector<double>(std::size_t(A.m()), 0.5));
  return fn_add(quad, random_coefficient(A, k, rng));
}

} // namespace

StructureReport operator_identity_checks(const LieAlgebroid& A, int k, const SamplePlan& plan,
                                         double tol) {
  if (k < 1) throw_invalid("operator identity suite needs order k >= 1");
  Rng rng(plan.seed);
  StructureReport report;
  report.tol = tol;
  for (const char* nm :
       {"vertical_total_commutator", "vertical_nilpotent", "vertical_inverts_basic",
        "family_vertical_shift", "family_recursion", "euler_cartan_relation",
        "cartan_inverts_total", "euler_kills_total", "euler_semibasic", "cartan_semibasic"})
    report.identities.push_back({nm, 0.0, {}});

  for (int trial = 0; trial < plan.count; ++trial) {
    OneForm lam = random_form(A, k, rng);
    OneForm mu = random_form(A, k - 1, rng);
    OneForm theta = random_form(A, 0, rng);
    FnPtr L = random_lagrangian(A, k, rng);

    // residual forms, evaluated below at one point through a shared context
    std::vector<std::tuple<int, OneForm, int>> checks; // (row, form, first level)
    auto want_zero = [&](int row, OneForm f, int min_level = 0) {
      checks.emplace_back(row, std::move(f), min_level);
    };

    want_zero(0, form_sub(form_sub(vertical(form_dT(lam)), form_dT(vertical(lam))), lam));
    want_zero(1, vertical_power(lam, k + 1));
    for (int r = 1; r <= k; ++r)
      want_zero(2, form_sub(vertical(form_dT(theta, r)),
                            form_scale(double(r), form_dT(theta, r - 1))));
    std::vector<OneForm> D;
    for (int r = 0; r <= k; ++r) D.push_back(operator_D(lam, r));
    for (int r = 0; r <= k; ++r) {
      OneForm target = r < k ? form_scale(double(r), D[std::size_t(r) + 1]) : OneForm(A, 0);
      want_zero(3, form_sub(vertical(D[std::size_t(r)]), target));
    }
    // splitting the leading term of the alternating sum gives
    // D_{r-1} = (1/(r-1)!) S^{r-1} - d_T o D_r
    for (int r = 1; r <= k; ++r)
      want_zero(4, form_sub(D[std::size_t(r) - 1],
                            form_sub(form_scale(1.0 / factorial(r - 1), vertical_power(lam, r - 1)),
                                     form_dT(D[std::size_t(r)]))));
    want_zero(5, form_add(form_sub(D[0], lam), form_dT(D[1])));
    want_zero(6, form_sub(cartan_operator(form_dT(mu)), mu));
    want_zero(7, variational_operator(form_dT(mu)));
    OneForm dL = differential_of_function(A, L, k);
    want_zero(8, variational_operator(dL), 1);
    want_zero(9, cartan_operator(dL), k);

    JetVals P = sample_plan_jet(A, 2 * k, plan, rng);
    EvalContext ctx(A, P);
    for (const auto& [row, f, min_level] : checks) {
      const double worst = max_abs_in_ctx(ctx, f, min_level);
      auto& res = report.identities[std::size_t(row)];
      if (worst > res.max_residual) {
        res.max_residual = worst;
        res.worst_point = P.to_doubles();
      }
    }
  }
  report.passed = std::all_of(report.identities.begin(), report.identities.end(),
                              [&](const IdentityResidual& r) { return r.max_residual <= tol; });
  return report;
}

} // namespace liejet
