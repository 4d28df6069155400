#include "liejet/morphism.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "liejet/error.hpp"

namespace liejet {

namespace {

std::vector<std::string> base_names(int n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

std::string y_name(int alpha, int r) {
  return "y" + std::to_string(alpha + 1) + "_" + std::to_string(r);
}

bool is_zero_expr(const Expr& e) { return e->op == ExprOp::number && e->value == 0.0; }
bool is_one_expr(const Expr& e) { return e->op == ExprOp::number && e->value == 1.0; }

// null stands for an identically zero term in the accumulators below
Expr fold_mul(const Expr& a, const Expr& b) {
  if (!a || !b || is_zero_expr(a) || is_zero_expr(b)) return nullptr;
  if (is_one_expr(a)) return b;
  if (is_one_expr(b)) return a;
  return expr_binary(ExprOp::mul, a, b);
}

Expr fold_add(const Expr& acc, const Expr& term) {
  if (!term) return acc;
  if (!acc) return term;
  return expr_binary(ExprOp::add, acc, term);
}

Expr or_zero(const Expr& e) { return e ? e : expr_number(0.0); }

// "x3" -> base slot 2; "y2_4" -> fiber 1, level 4; bare "y2" means level 1
struct CoordName {
  char kind = 0;  // 'x' or 'y'
  int index = 0;  // 0-based base or fiber index
  int level = 0;  // y only
};

bool parse_coord_name(const std::string& s, CoordName& out) {
  if (s.size() < 2 || (s[0] != 'x' && s[0] != 'y')) return false;
  std::size_t pos = 1;
  int first = 0;
  bool any = false;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    first = first * 10 + (s[pos] - '0');
    ++pos;
    any = true;
  }
  if (!any || first < 1) return false;
  if (s[0] == 'x') {
    if (pos != s.size()) return false;
    out = {'x', first - 1, 0};
    return true;
  }
  if (pos == s.size()) {
    out = {'y', first - 1, 1};
    return true;
  }
  if (s[pos] != '_') return false;
  ++pos;
  int level = 0;
  any = false;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    level = level * 10 + (s[pos] - '0');
    ++pos;
    any = true;
  }
  if (!any || level < 1 || pos != s.size()) return false;
  out = {'y', first - 1, level};
  return true;
}

// symbolic total time derivative along admissible curves:
//   d_T e = rho^i_beta y^beta_1 de/dx^i + y^alpha_{r+1} de/dy^alpha_r
Expr total_derivative_expr(const LieAlgebroid& A, const Expr& e) {
  Expr acc;
  for (const std::string& v : free_variables(e)) {
    CoordName c;
    if (!parse_coord_name(v, c))
      throw_config("total derivative of an expression with non-jet variable '" + v + "'");
    Expr de = differentiate(e, v);
    if (is_zero_expr(de)) continue;
    Expr speed;
    if (c.kind == 'x') {
      if (c.index >= A.n())
        throw_config("expression reads x" + std::to_string(c.index + 1) +
                     " beyond the base dimension " + std::to_string(A.n()));
      for (int b = 0; b < A.m(); ++b)
        speed = fold_add(speed, fold_mul(A.rho_expr(c.index, b), expr_variable(y_name(b, 1))));
    } else {
      if (c.index >= A.m())
        throw_config("expression reads y" + std::to_string(c.index + 1) +
                     " beyond the fiber rank " + std::to_string(A.m()));
      speed = expr_variable(y_name(c.index, c.level + 1));
    }
    acc = fold_add(acc, fold_mul(speed, de));
  }
  return or_zero(acc);
}

std::vector<Scalar> as_scalars(std::span<const double> xs) {
  return std::vector<Scalar>(xs.begin(), xs.end());
}

double factorial(int r) {
  double f = 1.0;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

} // namespace

Morphism::Morphism(AlgebroidPtr source, AlgebroidPtr target, std::vector<Expr> phi,
                   std::vector<std::vector<Expr>> Phi, std::string label)
    : source_(std::move(source)),
      target_(std::move(target)),
      phi_(std::move(phi)),
      Phi_(std::move(Phi)),
      label_(std::move(label)) {
  if (!source_ || !target_) throw_invalid("null algebroid in morphism");
  const int n = source_->n(), np = target_->n(), m = source_->m(), mp = target_->m();
  if (static_cast<int>(phi_.size()) != np)
    throw_shape("base map has " + std::to_string(phi_.size()) + " components, target base needs " +
                std::to_string(np));
  if (static_cast<int>(Phi_.size()) != mp)
    throw_shape("fiber map has " + std::to_string(Phi_.size()) + " rows, target rank is " +
                std::to_string(mp));
  const std::vector<std::string> names = base_names(n);
  phi_bound_.reserve(phi_.size());
  for (const Expr& e : phi_) {
    if (!e) throw_invalid("null base map component");
    phi_bound_.emplace_back(e, names);
  }
  Phi_bound_.reserve(static_cast<std::size_t>(mp) * static_cast<std::size_t>(m));
  for (const auto& row : Phi_) {
    if (static_cast<int>(row.size()) != m)
      throw_shape("fiber map row has " + std::to_string(row.size()) + " entries, source rank is " +
                  std::to_string(m));
    for (const Expr& e : row) {
      if (!e) throw_invalid("null fiber map entry");
      Phi_bound_.emplace_back(e, names);
    }
  }
}

Morphism Morphism::from_strings(AlgebroidPtr source, AlgebroidPtr target,
                                const std::vector<std::string>& phi,
                                const std::vector<std::vector<std::string>>& Phi,
                                std::string label) {
  std::vector<Expr> pe;
  pe.reserve(phi.size());
  for (const std::string& s : phi) pe.push_back(parse_expr(s));
  std::vector<std::vector<Expr>> Pe;
  Pe.reserve(Phi.size());
  for (const auto& row : Phi) {
    std::vector<Expr> re;
    re.reserve(row.size());
    for (const std::string& s : row) re.push_back(parse_expr(s));
    Pe.push_back(std::move(re));
  }
  return Morphism(std::move(source), std::move(target), std::move(pe), std::move(Pe),
                  std::move(label));
}

Morphism Morphism::identity(AlgebroidPtr A) {
  if (!A) throw_invalid("null algebroid in morphism");
  std::vector<Expr> phi;
  phi.reserve(static_cast<std::size_t>(A->n()));
  for (int i = 0; i < A->n(); ++i) phi.push_back(expr_variable("x" + std::to_string(i + 1)));
  std::vector<std::vector<Expr>> Phi(static_cast<std::size_t>(A->m()));
  for (int a = 0; a < A->m(); ++a) {
    auto& row = Phi[static_cast<std::size_t>(a)];
    row.reserve(static_cast<std::size_t>(A->m()));
    for (int b = 0; b < A->m(); ++b) row.push_back(expr_number(a == b ? 1.0 : 0.0));
  }
  std::string label = "id:" + A->name();
  return Morphism(A, A, std::move(phi), std::move(Phi), std::move(label));
}

const Expr& Morphism::base_expr(int ip) const {
  if (ip < 0 || ip >= target_->n()) throw_invalid("base map component out of range");
  return phi_[static_cast<std::size_t>(ip)];
}

const Expr& Morphism::fiber_expr(int ap, int a) const {
  if (ap < 0 || ap >= target_->m() || a < 0 || a >= source_->m())
    throw_invalid("fiber map entry out of range");
  return Phi_[static_cast<std::size_t>(ap)][static_cast<std::size_t>(a)];
}

std::vector<Scalar> Morphism::base_at(std::span<const Scalar> xs) const {
  if (static_cast<int>(xs.size()) != source_->n())
    throw_shape("base point has " + std::to_string(xs.size()) + " entries, expected " +
                std::to_string(source_->n()));
  std::vector<Scalar> out;
  out.reserve(phi_bound_.size());
  for (const BoundExpr& b : phi_bound_) out.push_back(b.eval(xs));
  return out;
}

std::vector<std::vector<Scalar>> Morphism::fiber_at(std::span<const Scalar> xs) const {
  if (static_cast<int>(xs.size()) != source_->n())
    throw_shape("base point has " + std::to_string(xs.size()) + " entries, expected " +
                std::to_string(source_->n()));
  const int m = source_->m(), mp = target_->m();
  std::vector<std::vector<Scalar>> out(static_cast<std::size_t>(mp));
  for (int ap = 0; ap < mp; ++ap) {
    auto& row = out[static_cast<std::size_t>(ap)];
    row.reserve(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a)
      row.push_back(Phi_bound_[static_cast<std::size_t>(ap * m + a)].eval(xs));
  }
  return out;
}

Morphism compose(const Morphism& outer, const Morphism& inner) {
  if (inner.target().n() != outer.source().n() || inner.target().m() != outer.source().m())
    throw_shape("morphisms do not compose: inner targets (n=" +
                std::to_string(inner.target().n()) + ", m=" + std::to_string(inner.target().m()) +
                "), outer starts at (n=" + std::to_string(outer.source().n()) +
                ", m=" + std::to_string(outer.source().m()) + ")");
  // middle base coordinates substituted by the inner base map
  std::map<std::string, Expr> mid;
  for (int i = 0; i < inner.target().n(); ++i)
    mid["x" + std::to_string(i + 1)] = inner.base_expr(i);

  std::vector<Expr> phi;
  phi.reserve(static_cast<std::size_t>(outer.target().n()));
  for (int i = 0; i < outer.target().n(); ++i) phi.push_back(substitute(outer.base_expr(i), mid));

  const int m = inner.source().m(), mm = inner.target().m(), mp = outer.target().m();
  std::vector<std::vector<Expr>> Phi(static_cast<std::size_t>(mp));
  for (int ap = 0; ap < mp; ++ap) {
    auto& row = Phi[static_cast<std::size_t>(ap)];
    row.reserve(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      Expr acc;
      for (int c = 0; c < mm; ++c)
        acc = fold_add(acc, fold_mul(substitute(outer.fiber_expr(ap, c), mid),
                                     inner.fiber_expr(c, a)));
      row.push_back(or_zero(acc));
    }
  }
  std::string label = outer.label().empty() || inner.label().empty()
                          ? outer.label() + inner.label()
                          : outer.label() + "*" + inner.label();
  return Morphism(inner.source_ptr(), outer.target_ptr(), std::move(phi), std::move(Phi),
                  std::move(label));
}

StructureReport check_morphism(const Morphism& M, const SamplePlan& plan, double tol) {
  const LieAlgebroid& S = M.source();
  const LieAlgebroid& T = M.target();
  const int n = S.n(), m = S.m(), np = T.n(), mp = T.m();
  const std::vector<std::string> names = base_names(n);

  // symbolic base partials of both maps, bound once
  std::vector<BoundExpr> dphi(static_cast<std::size_t>(np) * static_cast<std::size_t>(n));
  for (int ip = 0; ip < np; ++ip)
    for (int j = 0; j < n; ++j)
      dphi[static_cast<std::size_t>(ip * n + j)] =
          BoundExpr(differentiate(M.base_expr(ip), names[static_cast<std::size_t>(j)]), names);
  std::vector<BoundExpr> dPhi(static_cast<std::size_t>(mp) * static_cast<std::size_t>(m) *
                              static_cast<std::size_t>(n));
  const auto dPhi_at = [&](int ap, int a, int j) -> const BoundExpr& {
    return dPhi[static_cast<std::size_t>((ap * m + a) * n + j)];
  };
  for (int ap = 0; ap < mp; ++ap)
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < n; ++j)
        dPhi[static_cast<std::size_t>((ap * m + a) * n + j)] =
            BoundExpr(differentiate(M.fiber_expr(ap, a), names[static_cast<std::size_t>(j)]), names);

  IdentityResidual anchor{"anchor compatibility", 0.0, {}};
  IdentityResidual bracket{"bracket compatibility", 0.0, {}};
  Rng rng(plan.seed);
  for (int s = 0; s < plan.count; ++s) {
    const std::vector<double> x = sample_base_point(S, plan, rng);
    const std::vector<Scalar> xs = as_scalars(x);
    const std::vector<Scalar> xps = M.base_at(xs);
    const std::vector<std::vector<Scalar>> Ph = M.fiber_at(xs);
    const auto Phv = [&](int ap, int a) {
      return Ph[static_cast<std::size_t>(ap)][static_cast<std::size_t>(a)].as_double();
    };

    double worst_a = 0.0;
    for (int ip = 0; ip < np; ++ip)
      for (int a = 0; a < m; ++a) {
        double r = 0.0;
        for (int ap = 0; ap < mp; ++ap) r += T.rho_at(ip, ap, xps).as_double() * Phv(ap, a);
        for (int j = 0; j < n; ++j)
          r -= dphi[static_cast<std::size_t>(ip * n + j)].eval(xs).as_double() *
               S.rho_at(j, a, xs).as_double();
        worst_a = std::max(worst_a, std::abs(r));
      }
    if (worst_a > anchor.max_residual) {
      anchor.max_residual = worst_a;
      anchor.worst_point = x;
    }

    double worst_b = 0.0;
    for (int gp = 0; gp < mp; ++gp)
      for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
          double r = 0.0;
          for (int g = 0; g < m; ++g) r += Phv(gp, g) * S.c_at(g, a, b, xs).as_double();
          for (int ap = 0; ap < mp; ++ap)
            for (int bp = 0; bp < mp; ++bp)
              r -= T.c_at(gp, ap, bp, xps).as_double() * Phv(ap, a) * Phv(bp, b);
          for (int j = 0; j < n; ++j)
            r -= S.rho_at(j, a, xs).as_double() * dPhi_at(gp, b, j).eval(xs).as_double() -
                 S.rho_at(j, b, xs).as_double() * dPhi_at(gp, a, j).eval(xs).as_double();
          worst_b = std::max(worst_b, std::abs(r));
        }
    if (worst_b > bracket.max_residual) {
      bracket.max_residual = worst_b;
      bracket.worst_point = x;
    }
  }

  StructureReport rep;
  rep.tol = tol;
  rep.identities = {std::move(anchor), std::move(bracket)};
  rep.passed = true;
  for (const IdentityResidual& r : rep.identities)
    if (!(r.max_residual <= tol)) rep.passed = false;
  return rep;
}

JetVals push_jet(const Morphism& M, const JetVals& P) {
  const LieAlgebroid& S = M.source();
  if (P.n() != S.n() || P.m() != S.m())
    throw_shape("jet of (n=" + std::to_string(P.n()) + ", m=" + std::to_string(P.m()) +
                ") pushed through a morphism from (n=" + std::to_string(S.n()) +
                ", m=" + std::to_string(S.m()) + ")");
  const int k = P.k(), n = S.n(), np = M.target().n(), mp = M.target().m();
  const int m = S.m();
  JetVals out(np, mp, k);
  if (k == 0) {
    const std::vector<Scalar> xp = M.base_at(P.slots().subspan(0, static_cast<std::size_t>(n)));
    for (int ip = 0; ip < np; ++ip) out.x(ip) = xp[static_cast<std::size_t>(ip)];
    return out;
  }
  if (k == 1) {
    const std::span<const Scalar> xs = P.slots().subspan(0, static_cast<std::size_t>(n));
    const std::vector<Scalar> xp = M.base_at(xs);
    const std::vector<std::vector<Scalar>> Ph = M.fiber_at(xs);
    for (int ip = 0; ip < np; ++ip) out.x(ip) = xp[static_cast<std::size_t>(ip)];
    for (int ap = 0; ap < mp; ++ap) {
      Scalar v(0.0);
      for (int a = 0; a < m; ++a)
        v += Ph[static_cast<std::size_t>(ap)][static_cast<std::size_t>(a)] * P.y(1, a);
      out.y(1, ap) = v;
    }
    return out;
  }
  // the pushed curve is t -> Phi(x(t)) y_1(t) over the prolongation curve of P
  const JetVals curve = jet_curve(S, P, 1, k - 1);
  const std::span<const Scalar> xs = curve.slots().subspan(0, static_cast<std::size_t>(n));
  const std::vector<Scalar> xp = M.base_at(xs);
  const std::vector<std::vector<Scalar>> Ph = M.fiber_at(xs);
  for (int ip = 0; ip < np; ++ip) out.x(ip) = xp[static_cast<std::size_t>(ip)].coeff(0);
  for (int ap = 0; ap < mp; ++ap) {
    Scalar v(0.0);
    for (int a = 0; a < m; ++a)
      v += Ph[static_cast<std::size_t>(ap)][static_cast<std::size_t>(a)] * curve.y(1, a);
    for (int r = 1; r <= k; ++r) out.y(r, ap) = Scalar(factorial(r - 1)) * v.coeff(r - 1);
  }
  return out;
}

Lagrangian reduce_lagrangian(const Morphism& M, const Lagrangian& Ltarget) {
  const LieAlgebroid& T = M.target();
  if (Ltarget.algebroid().n() != T.n() || Ltarget.algebroid().m() != T.m())
    throw_shape("Lagrangian lives on (n=" + std::to_string(Ltarget.algebroid().n()) +
                ", m=" + std::to_string(Ltarget.algebroid().m()) + "), the morphism targets (n=" +
                std::to_string(T.n()) + ", m=" + std::to_string(T.m()) + ")");
  const int k = Ltarget.order(), mp = T.m();
  std::map<std::string, Expr> map;
  for (int ip = 0; ip < T.n(); ++ip) map["x" + std::to_string(ip + 1)] = M.base_expr(ip);

  // level 1 is the fiber map; level r+1 the symbolic total derivative of level r
  std::vector<Expr> cur(static_cast<std::size_t>(mp));
  for (int ap = 0; ap < mp; ++ap) {
    Expr acc;
    for (int a = 0; a < M.source().m(); ++a)
      acc = fold_add(acc, fold_mul(M.fiber_expr(ap, a), expr_variable(y_name(a, 1))));
    cur[static_cast<std::size_t>(ap)] = or_zero(acc);
    map[y_name(ap, 1)] = cur[static_cast<std::size_t>(ap)];
    map["y" + std::to_string(ap + 1)] = cur[static_cast<std::size_t>(ap)];
  }
  for (int r = 2; r <= k; ++r)
    for (int ap = 0; ap < mp; ++ap) {
      cur[static_cast<std::size_t>(ap)] =
          total_derivative_expr(M.source(), cur[static_cast<std::size_t>(ap)]);
      map[y_name(ap, r)] = cur[static_cast<std::size_t>(ap)];
    }
  return Lagrangian(M.source_ptr(), k, substitute(Ltarget.expr(), map), Ltarget.label());
}

ReductionComparison compare_reduction(const Morphism& M, const Lagrangian& Ltarget,
                                      std::span<const double> source_state0, double t0, double t1,
                                      double h) {
  const Lagrangian L = reduce_lagrangian(M, Ltarget);
  const AssembledODE up = assemble_ode(L);
  const AssembledODE down = assemble_ode(Ltarget);

  ReductionComparison out;
  out.source = integrate(up, source_state0, t0, t1, h);

  out.pushed.n = M.target().n();
  out.pushed.m = M.target().m();
  out.pushed.order = Ltarget.order();
  out.pushed.step = h;
  out.pushed.method = "pushforward";
  out.pushed.label = out.source.label.empty() ? "pushed" : out.source.label + ":pushed";
  out.pushed.t = out.source.t;
  out.pushed.states.reserve(out.source.states.size());
  for (int i = 0; i < out.source.size(); ++i)
    out.pushed.states.push_back(push_jet(M, out.source.state_jet(i)).to_doubles());

  out.target = integrate(down, out.pushed.states.front(), t0, t1, h);
  if (out.target.size() != out.pushed.size())
    throw_invalid("reduction comparison grids disagree");
  for (std::size_t i = 0; i < out.pushed.states.size(); ++i)
    for (std::size_t c = 0; c < out.pushed.states[i].size(); ++c)
      out.max_gap = std::max(out.max_gap, std::abs(out.pushed.states[i][c] - out.target.states[i][c]));
  return out;
}

Trajectory reconstruct(const LieAlgebroid& A, const SectionAlongCurve& xi,
                       std::span<const double> x0, double t0, double t1, double h) {
  if (xi.m() != A.m())
    throw_shape("fiber curve has " + std::to_string(xi.m()) + " components, the algebroid rank is " +
                std::to_string(A.m()));
  if (static_cast<int>(x0.size()) != A.n()) throw_shape("initial base point has the wrong length");
  if (!(h > 0)) throw_domain("step size must be positive");
  if (!(t1 > t0)) throw_domain("empty integration interval");
  for (double v : x0)
    if (!std::isfinite(v)) throw_domain("non-finite initial base point");

  const int n = A.n(), m = A.m();
  const auto rhs = [&](double t, const std::vector<double>& x) {
    const std::vector<Scalar> xs = as_scalars(x);
    const std::vector<double> v = xi.values(t);
    std::vector<double> f(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a)
        f[static_cast<std::size_t>(i)] += A.rho_at(i, a, xs).as_double() * v[static_cast<std::size_t>(a)];
    return f;
  };
  const auto shifted = [&](const std::vector<double>& x, const std::vector<double>& d, double w) {
    std::vector<double> s(x);
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] += w * d[static_cast<std::size_t>(i)];
    return s;
  };

  Trajectory traj;
  traj.n = n;
  traj.m = 0;
  traj.order = 1;
  traj.step = h;
  traj.label = "reconstruction:" + A.name();
  std::vector<double> cur(x0.begin(), x0.end());
  traj.t.push_back(t0);
  traj.states.push_back(cur);
  for (long i = 0;; ++i) {
    const double tcur = traj.t.back();
    const double remaining = t1 - tcur;
    if (remaining <= 0) break;
    const bool last = remaining <= h * (1 + 1e-9);
    const double hs = last ? remaining : h;
    const std::vector<double> k1 = rhs(tcur, cur);
    const std::vector<double> k2 = rhs(tcur + hs / 2, shifted(cur, k1, hs / 2));
    const std::vector<double> k3 = rhs(tcur + hs / 2, shifted(cur, k2, hs / 2));
    const std::vector<double> k4 = rhs(tcur + hs, shifted(cur, k3, hs));
    for (int j = 0; j < n; ++j)
      cur[std::size_t(j)] += hs / 6 *
                             (k1[std::size_t(j)] + 2 * k2[std::size_t(j)] +
                              2 * k3[std::size_t(j)] + k4[std::size_t(j)]);
    const double tnext = last ? t1 : t0 + double(i + 1) * h;
    for (double v : cur)
      if (!std::isfinite(v))
        throw_domain("non-finite base point at t = " + std::to_string(tnext));
    traj.t.push_back(tnext);
    traj.states.push_back(cur);
    if (last) break;
  }
  return traj;
}

Trajectory reconstruct_through(const Morphism& M, const SectionAlongCurve& xi_target,
                               std::span<const double> x0, double t0, double t1,
                               double h) {
  const int n = M.source().n(), m = M.source().m();
  if (M.target().m() != m)
    throw_shape("reconstruction through '" + M.label() +
                "' needs a square fiber map: source rank " + std::to_string(m) +
                ", target rank " + std::to_string(M.target().m()));
  if (xi_target.m() != m)
    throw_shape("fiber curve has " + std::to_string(xi_target.m()) +
                " components, the target rank is " + std::to_string(m));
  if (static_cast<int>(x0.size()) != n) throw_shape("initial base point has the wrong length");
  if (!(h > 0)) throw_domain("step size must be positive");
  if (!(t1 > t0)) throw_domain("empty integration interval");
  for (double v : x0)
    if (!std::isfinite(v)) throw_domain("non-finite initial base point");

  // same floor the dynamics assembly uses for its fiber solves
  constexpr double kFiberRcondMin = 1e-10;

  const auto rhs = [&](double t, const std::vector<double>& x) {
    const std::vector<Scalar> xs = as_scalars(x);
    const std::vector<std::vector<Scalar>> Ph = M.fiber_at(xs);
    Eigen::MatrixXd A(m, m);
    for (int ap = 0; ap < m; ++ap)
      for (int a = 0; a < m; ++a)
        A(ap, a) = Ph[static_cast<std::size_t>(ap)][static_cast<std::size_t>(a)].as_double();
    const std::vector<double> v = xi_target.values(t);
    Eigen::VectorXd b(m);
    for (int a = 0; a < m; ++a) b(a) = v[static_cast<std::size_t>(a)];
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(m - 1);
    const double rcond = smin / std::max(smax, 1.0);
    if (rcond < kFiberRcondMin)
      throw_regularity("fiber map of '" + M.label() + "' numerically singular (rcond = " +
                       std::to_string(rcond) + ") at t = " + std::to_string(t));
    const Eigen::VectorXd u = svd.solve(b);
    std::vector<double> f(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a)
        f[static_cast<std::size_t>(i)] += M.source().rho_at(i, a, xs).as_double() * u(a);
    return f;
  };
  const auto shifted = [&](const std::vector<double>& x, const std::vector<double>& d, double w) {
    std::vector<double> s(x);
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] += w * d[static_cast<std::size_t>(i)];
    return s;
  };

  Trajectory traj;
  traj.n = n;
  traj.m = 0;
  traj.order = 1;
  traj.step = h;
  traj.label = "reconstruction:" + M.label();
  std::vector<double> cur(x0.begin(), x0.end());
  traj.t.push_back(t0);
  traj.states.push_back(cur);
  for (long i = 0;; ++i) {
    const double tcur = traj.t.back();
    const double remaining = t1 - tcur;
    if (remaining <= 0) break;
    const bool last = remaining <= h * (1 + 1e-9);
    const double hs = last ? remaining : h;
    const std::vector<double> k1 = rhs(tcur, cur);
    const std::vector<double> k2 = rhs(tcur + hs / 2, shifted(cur, k1, hs / 2));
    const std::vector<double> k3 = rhs(tcur + hs / 2, shifted(cur, k2, hs / 2));
    const std::vector<double> k4 = rhs(tcur + hs, shifted(cur, k3, hs));
    for (int j = 0; j < n; ++j)
      cur[std::size_t(j)] += hs / 6 *
                             (k1[std::size_t(j)] + 2 * k2[std::size_t(j)] +
                              2 * k3[std::size_t(j)] + k4[std::size_t(j)]);
    const double tnext = last ? t1 : t0 + double(i + 1) * h;
    for (double v : cur)
      if (!std::isfinite(v))
        throw_domain("non-finite base point at t = " + std::to_string(tnext));
    traj.t.push_back(tnext);
    traj.states.push_back(cur);
    if (last) break;
  }
  return traj;
}

} // namespace liejet
