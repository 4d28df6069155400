#include "liejet/variational.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <utility>

#include "liejet/error.hpp"

namespace liejet {

struct LagrangianCache {
  std::once_flag momenta_once;
  MomentaFamily momenta;
  std::once_flag el_once;
  std::vector<FnPtr> el;
};

namespace {

const FnPtr& zero_fn() {
  static const FnPtr z = fn_constant(0.0);
  return z;
}

bool is_zero_fn(const FnPtr& f) { return f->kind == FnKind::constant && f->value == 0.0; }

double factorial(int r) {
  double f = 1.0;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

// normalized coefficients: d/dt maps c_j to (j+1) c_{j+1}, dropping the degree by one
Scalar taylor_derivative(const Scalar& s) {
  const std::vector<Scalar>& c = s.taylor_coeffs();
  if (c.size() < 2) throw_shape("time derivative needs Taylor degree >= 1");
  std::vector<Scalar> d;
  d.reserve(c.size() - 1);
  for (std::size_t j = 1; j < c.size(); ++j) d.push_back(Scalar(double(j)) * c[j]);
  return Scalar::taylor(std::move(d));
}

Scalar taylor_truncate(const Scalar& s, int degree) {
  const std::vector<Scalar>& c = s.taylor_coeffs();
  std::vector<Scalar> t(c.begin(), c.begin() + degree + 1);
  return Scalar::taylor(std::move(t));
}

} // namespace

Lagrangian::Lagrangian(AlgebroidPtr A, int order, Expr expr, std::string label)
    : A_(std::move(A)), order_(order), expr_(std::move(expr)), label_(std::move(label)) {
  if (!A_) throw_invalid("null algebroid");
  if (order_ < 1) throw_invalid("Lagrangian order must be >= 1");
  if (!expr_) throw_invalid("null Lagrangian expression");
  fn_ = fn_expression(A_->n(), A_->m(), expr_);
  if (fn_->order > order_)
    throw_config("Lagrangian of order " + std::to_string(order_) + " reads jet level " +
                 std::to_string(fn_->order));
  cache_ = std::make_shared<LagrangianCache>();
}

int MomentaFamily::eval_order(int r) const {
  int o = 0;
  for (const FnPtr& f : p.at(std::size_t(r))) o = std::max(o, f->order);
  return o;
}

const MomentaFamily& momenta(const Lagrangian& L) {
  LagrangianCache& cache = *L.cache_;
  std::call_once(cache.momenta_once, [&] {
    const LieAlgebroid& A = L.algebroid();
    const int n = A.n(), m = A.m(), k = L.order();
    MomentaFamily fam;
    fam.k = k;
    fam.p.assign(std::size_t(k), std::vector<FnPtr>(std::size_t(m)));
    for (int alpha = 0; alpha < m; ++alpha)
      fam.p[std::size_t(k) - 1][std::size_t(alpha)] =
          fn_partial(L.fn(), jet_y_slot(n, m, k, alpha));
    for (int r = k - 1; r >= 1; --r)
      for (int alpha = 0; alpha < m; ++alpha)
        fam.p[std::size_t(r) - 1][std::size_t(alpha)] =
            fn_sub(fn_partial(L.fn(), jet_y_slot(n, m, r, alpha)),
                   fn_total_derivative(fam.p[std::size_t(r)][std::size_t(alpha)]));
    cache.momenta = std::move(fam);
  });
  return cache.momenta;
}

const std::vector<FnPtr>& el_functions(const Lagrangian& L) {
  LagrangianCache& cache = *L.cache_;
  std::call_once(cache.el_once, [&] {
    const LieAlgebroid& A = L.algebroid();
    const int n = A.n(), m = A.m();
    const MomentaFamily& fam = momenta(L);
    std::vector<FnPtr> el(static_cast<std::size_t>(m));
    for (int alpha = 0; alpha < m; ++alpha) {
      std::vector<FnPtr> terms;
      std::vector<double> weights;
      for (int i = 0; i < n; ++i) {
        FnPtr dLx = fn_partial(L.fn(), jet_x_slot(i));
        if (is_zero_fn(dLx)) continue;
        terms.push_back(fn_mul(fn_expression(n, m, A.rho_expr(i, alpha)), dLx));
        weights.push_back(1.0);
      }
      terms.push_back(fn_total_derivative(fam.pi(alpha)));
      weights.push_back(-1.0);
      for (int gamma = 0; gamma < m; ++gamma) {
        if (is_zero_fn(fam.pi(gamma))) continue;
        for (int beta = 0; beta < m; ++beta) {
          const Expr& c = A.c_expr(gamma, alpha, beta);
          if (!c) continue;
          terms.push_back(
              fn_product({fam.pi(gamma), fn_expression(n, m, c), fn_y(n, m, 1, beta)}));
          weights.push_back(-1.0);
        }
      }
      el[std::size_t(alpha)] = fn_sum(std::move(terms), std::move(weights));
    }
    cache.el = std::move(el);
  });
  return cache.el;
}

std::vector<double> el_residual(const Lagrangian& L, const JetVals& P) {
  const std::vector<FnPtr>& el = el_functions(L);
  EvalContext ctx(L.algebroid(), P);
  std::vector<double> out;
  out.reserve(el.size());
  for (const FnPtr& f : el) out.push_back(ctx.eval(f).as_double());
  return out;
}

std::vector<double> el_residual_by_parts(const Lagrangian& L, const JetVals& P) {
  const LieAlgebroid& A = L.algebroid();
  OneForm EdL = variational_operator(differential_of_function(A, L.fn(), L.order()));
  EvalContext ctx(A, P);
  std::vector<double> out;
  out.reserve(std::size_t(A.m()));
  for (int alpha = 0; alpha < A.m(); ++alpha)
    out.push_back(ctx.eval(EdL.coeff(0, alpha)).as_double());
  return out;
}

OneForm cartan_form(const Lagrangian& L) {
  const MomentaFamily& fam = momenta(L);
  const int k = L.order(), m = L.algebroid().m();
  OneForm out(L.algebroid(), 2 * k - 1);
  for (int alpha = 0; alpha < m; ++alpha) {
    out.set_coeff(0, alpha, fam.pi(alpha));
    for (int r = 1; r <= k - 1; ++r)
      out.set_coeff(r, alpha, fam.p[std::size_t(r)][std::size_t(alpha)]);
  }
  return out;
}

CompleteLift complete_lift(const LieAlgebroid& A, const std::vector<Expr>& eta, int order) {
  const int n = A.n(), m = A.m();
  if (int(eta.size()) != m) throw_invalid("section needs one component per basis element");
  if (order < 0) throw_invalid("negative lift order");
  CompleteLift lift;
  lift.base.resize(std::size_t(m));
  for (int alpha = 0; alpha < m; ++alpha) {
    if (!eta[std::size_t(alpha)]) throw_invalid("null section component");
    FnPtr f = fn_expression(n, m, eta[std::size_t(alpha)]);
    if (f->order > 0)
      throw_config("section component " + std::to_string(alpha + 1) +
                   " may read base coordinates only");
    lift.base[std::size_t(alpha)] = std::move(f);
  }
  if (order == 0) return lift;

  std::vector<FnPtr> v1(static_cast<std::size_t>(m));
  for (int alpha = 0; alpha < m; ++alpha) {
    std::vector<FnPtr> terms = {fn_total_derivative(lift.base[std::size_t(alpha)])};
    for (int beta = 0; beta < m; ++beta)
      for (int gamma = 0; gamma < m; ++gamma) {
        const Expr& c = A.c_expr(alpha, beta, gamma);
        if (!c || is_zero_fn(lift.base[std::size_t(gamma)])) continue;
        terms.push_back(fn_product(
            {fn_expression(n, m, c), fn_y(n, m, 1, beta), lift.base[std::size_t(gamma)]}));
      }
    v1[std::size_t(alpha)] = fn_sum(std::move(terms), std::vector<double>(terms.size(), 1.0));
  }
  lift.v.resize(std::size_t(order));
  lift.v[0] = std::move(v1);
  for (int r = 2; r <= order; ++r) {
    lift.v[std::size_t(r) - 1].resize(std::size_t(m));
    for (int alpha = 0; alpha < m; ++alpha)
      lift.v[std::size_t(r) - 1][std::size_t(alpha)] =
          fn_total_derivative(lift.v[0][std::size_t(alpha)], r - 1);
  }
  return lift;
}

std::vector<double> complete_lift_coeffs(const LieAlgebroid& A, const std::vector<Expr>& eta,
                                         const JetVals& P) {
  if (P.n() != A.n() || P.m() != A.m())
    throw_shape("jet does not belong to algebroid '" + A.name() + "'");
  const int m = A.m(), k = P.k();
  CompleteLift lift = complete_lift(A, eta, k);
  EvalContext ctx(A, P);
  std::vector<double> out;
  out.reserve(std::size_t(m) * std::size_t(k + 1));
  for (int alpha = 0; alpha < m; ++alpha)
    out.push_back(ctx.eval(lift.base[std::size_t(alpha)]).as_double());
  for (int r = 1; r <= k; ++r)
    for (int alpha = 0; alpha < m; ++alpha)
      out.push_back(ctx.eval(lift.v[std::size_t(r) - 1][std::size_t(alpha)]).as_double());
  return out;
}

FnPtr pair_with_complete_lift(const OneForm& lambda, const std::vector<Expr>& eta) {
  const LieAlgebroid& A = lambda.algebroid();
  const CompleteLift lift = complete_lift(A, eta, lambda.degree());
  std::vector<FnPtr> terms;
  for (int alpha = 0; alpha < A.m(); ++alpha) {
    if (!is_zero_fn(lambda.coeff(0, alpha)))
      terms.push_back(fn_mul(lambda.coeff(0, alpha), lift.base[std::size_t(alpha)]));
    for (int r = 1; r <= lambda.degree(); ++r)
      if (!is_zero_fn(lambda.coeff(r, alpha)))
        terms.push_back(
            fn_mul(lambda.coeff(r, alpha), lift.v[std::size_t(r) - 1][std::size_t(alpha)]));
  }
  return fn_sum(std::move(terms), std::vector<double>(terms.size(), 1.0));
}

FnPtr lift_derivative(const LieAlgebroid& A, const FnPtr& F, int order,
                      const std::vector<Expr>& eta) {
  return pair_with_complete_lift(differential_of_function(A, F, order), eta);
}

SectionAlongCurve SectionAlongCurve::from_expressions(std::vector<Expr> sigma) {
  if (sigma.empty()) throw_invalid("section needs at least one component");
  for (const Expr& e : sigma) {
    if (!e) throw_invalid("null section component");
    for (const std::string& v : free_variables(e))
      if (v != "t") throw_config("section components may read only t, found '" + v + "'");
  }
  SectionAlongCurve s;
  s.m_ = int(sigma.size());
  s.sigma_ = std::move(sigma);
  return s;
}

SectionAlongCurve SectionAlongCurve::from_strings(const std::vector<std::string>& sigma) {
  std::vector<Expr> parsed;
  parsed.reserve(sigma.size());
  for (const std::string& src : sigma) parsed.push_back(parse_expr(src));
  return from_expressions(std::move(parsed));
}

SectionAlongCurve SectionAlongCurve::from_sampler(int m, Sampler sample) {
  if (m < 1) throw_invalid("section needs at least one component");
  if (!sample) throw_invalid("null section sampler");
  SectionAlongCurve s;
  s.m_ = m;
  s.sample_ = std::move(sample);
  return s;
}

std::vector<Scalar> SectionAlongCurve::taylor(double t, int degree) const {
  if (degree < 1) throw_invalid("section Taylor degree must be >= 1");
  std::vector<Scalar> out;
  out.reserve(std::size_t(m_));
  if (!sigma_.empty()) {
    const Env env{{"t", Scalar::taylor_variable(t, degree)}};
    for (const Expr& e : sigma_) {
      Scalar v = eval(e, env);
      // constant components broadcast to doubles; rewrap for one shared shape
      out.push_back(v.is_taylor() ? v : Scalar::taylor_constant(v.as_double(), degree));
    }
    return out;
  }
  const std::vector<std::vector<double>> rows = sample_(t, degree);
  if (int(rows.size()) != m_) throw_shape("section sampler returned wrong component count");
  for (const std::vector<double>& row : rows) {
    if (int(row.size()) != degree + 1)
      throw_shape("section sampler returned wrong coefficient count");
    out.push_back(Scalar::taylor(std::vector<Scalar>(row.begin(), row.end())));
  }
  return out;
}

std::vector<double> SectionAlongCurve::values(double t) const {
  std::vector<double> out;
  out.reserve(std::size_t(m_));
  for (const Scalar& s : taylor(t, 1)) out.push_back(s.coeff(0).as_double());
  return out;
}

std::vector<double> variational_field(const LieAlgebroid& A, const JetVals& P,
                                      const SectionAlongCurve& sigma, double t) {
  const int n = A.n(), m = A.m(), k = P.k();
  if (P.n() != n || P.m() != m)
    throw_shape("jet does not belong to algebroid '" + A.name() + "'");
  if (sigma.m() != m) throw_invalid("section rank does not match the algebroid");
  if (k < 1) throw_invalid("variational field needs jet order >= 1");

  std::vector<double> out(std::size_t(jet_slot_count(n, m, k)), 0.0);

  const std::vector<Scalar> sigT = sigma.taylor(t, k);
  if (n > 0) {
    const std::vector<Scalar> base(P.slots().begin(), P.slots().begin() + n);
    for (int i = 0; i < n; ++i) {
      double w = 0.0;
      for (int alpha = 0; alpha < m; ++alpha)
        w += A.rho_at(i, alpha, base).as_double() *
             sigT[std::size_t(alpha)].coeff(0).as_double();
      out[std::size_t(jet_x_slot(i))] = w;
    }
  }

  if (k == 1) {
    // single level: the bracket value itself, no inner time derivatives
    std::vector<Scalar> base(P.slots().begin(), P.slots().begin() + n);
    for (int alpha = 0; alpha < m; ++alpha) {
      double v = sigT[std::size_t(alpha)].coeff(1).as_double();
      for (int beta = 0; beta < m; ++beta)
        for (int gamma = 0; gamma < m; ++gamma) {
          const Expr& c = A.c_expr(alpha, beta, gamma);
          if (!c) continue;
          v += A.c_at(alpha, beta, gamma, base).as_double() * P.y(1, beta).as_double() *
               sigT[std::size_t(gamma)].coeff(0).as_double();
        }
      out[std::size_t(jet_y_slot(n, m, 1, alpha))] = v;
    }
    return out;
  }

  // bracket^alpha(t) = sigma_dot^alpha + C^alpha_{beta gamma} a^beta sigma^gamma
  // as a degree k-1 Taylor expansion along the curve through P
  const int D = k - 1;
  const JetVals curve = jet_curve(A, P, 1, D);
  std::vector<Scalar> xs;
  xs.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) xs.push_back(curve.x(i));
  for (int alpha = 0; alpha < m; ++alpha) {
    Scalar b = taylor_derivative(sigT[std::size_t(alpha)]);
    for (int beta = 0; beta < m; ++beta)
      for (int gamma = 0; gamma < m; ++gamma) {
        const Expr& c = A.c_expr(alpha, beta, gamma);
        if (!c) continue;
        b += A.c_at(alpha, beta, gamma, xs) * curve.y(1, beta) *
             taylor_truncate(sigT[std::size_t(gamma)], D);
      }
    for (int r = 1; r <= k; ++r)
      out[std::size_t(jet_y_slot(n, m, r, alpha))] =
          factorial(r - 1) * b.coeff(r - 1).as_double();
  }
  return out;
}

NoetherResult noether_integral(const Lagrangian& L, const std::vector<Expr>& eta, const FnPtr& F,
                               const SamplePlan& plan, double tol) {
  const LieAlgebroid& A = L.algebroid();
  const int k = L.order();
  const FnPtr& F_eff = F ? F : zero_fn();
  if (F_eff->m != 0 && (F_eff->n != A.n() || F_eff->m != A.m()))
    throw_shape("boundary function belongs to a different jet space");
  if (F_eff->order > k - 1)
    throw_config("boundary function must live on the order-" + std::to_string(k - 1) +
                 " jet space, reads level " + std::to_string(F_eff->order));

  NoetherResult res;
  res.tol = tol;
  const FnPtr premise =
      fn_sub(lift_derivative(A, L.fn(), k, eta), fn_total_derivative(F_eff));
  Rng rng(plan.seed);
  double worst = 0.0;
  for (int trial = 0; trial < plan.count; ++trial) {
    const JetVals P = sample_plan_jet(A, k, plan, rng);
    worst = std::max(worst, std::abs(eval_at(premise, A, P).as_double()));
  }
  res.symmetry_residual = worst;
  res.symmetry_ok = worst <= tol;
  res.integral = fn_sub(F_eff, pair_with_complete_lift(cartan_form(L), eta));
  return res;
}

} // namespace liejet
