#include "liejet/algebroid.hpp"

#include <cmath>

namespace liejet {

namespace {

std::vector<std::string> base_var_names(int n) {
  std::vector<std::string> names;
  names.reserve(std::size_t(n));
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

} // namespace

LieAlgebroid::LieAlgebroid(std::string name, int n, int m,
                           std::vector<std::vector<Expr>> rho,
                           const std::vector<CEntry>& entries)
    : name_(std::move(name)), n_(n), m_(m) {
  if (n < 0 || m < 1) throw_config("algebroid needs n >= 0 and m >= 1");
  if (rho.size() != std::size_t(n)) throw_config("anchor row count must equal n");
  rho_.reserve(std::size_t(n) * std::size_t(m));
  for (const auto& row : rho) {
    if (row.size() != std::size_t(m)) throw_config("anchor column count must equal m");
    for (const auto& e : row) {
      if (!e) throw_config("anchor entries must be non-null expressions");
      rho_.push_back(e);
    }
  }

  // Entries are stored as given; the mirror orientation is filled in by
  // antisymmetry only where it was not given explicitly. A pair given with
  // inconsistent values is therefore representable, and it is
  // check_structure, not the constructor, that flags it.
  c_.assign(std::size_t(m) * std::size_t(m) * std::size_t(m), nullptr);
  std::vector<char> given(c_.size(), 0);
  for (const auto& ent : entries) {
    if (ent.gamma < 0 || ent.gamma >= m || ent.alpha < 0 || ent.alpha >= m ||
        ent.beta < 0 || ent.beta >= m)
      throw_config("structure entry index out of range in algebroid '" + name_ + "'");
    if (ent.alpha == ent.beta)
      throw_config("structure entry with alpha == beta must be zero (omit it)");
    if (!ent.value) throw_config("structure entry with null expression");
    const auto slot = idx_mmm(ent.gamma, ent.alpha, ent.beta);
    if (given[slot])
      throw_config("structure entry (" + std::to_string(ent.gamma + 1) + "," +
                   std::to_string(ent.alpha + 1) + "," + std::to_string(ent.beta + 1) +
                   ") given twice");
    c_[slot] = ent.value;
    given[slot] = 1;
    c_all_zero_ = false;
  }
  for (int g = 0; g < m; ++g)
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        const auto ab = idx_mmm(g, a, b), ba = idx_mmm(g, b, a);
        if (given[ab] && !given[ba]) c_[ba] = expr_unary(ExprOp::neg, c_[ab]);
        else if (given[ba] && !given[ab]) c_[ab] = expr_unary(ExprOp::neg, c_[ba]);
      }

  const auto names = base_var_names(n_);
  rho_bound_.reserve(rho_.size());
  for (const auto& e : rho_) rho_bound_.emplace_back(e, names);
  c_bound_index_.assign(c_.size(), -1);
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i]) {
      c_bound_index_[i] = int(c_bound_.size());
      c_bound_.emplace_back(c_[i], names);
    }
  }
}

Scalar LieAlgebroid::rho_at(int i, int alpha, std::span<const Scalar> xs) const {
  return rho_bound_[idx_nm(i, alpha)].eval(xs);
}

Scalar LieAlgebroid::c_at(int gamma, int alpha, int beta, std::span<const Scalar> xs) const {
  const int bi = c_bound_index_[idx_mmm(gamma, alpha, beta)];
  if (bi < 0) return Scalar(0.0);
  return c_bound_[std::size_t(bi)].eval(xs);
}

std::vector<double> sample_base_point(const LieAlgebroid& A, const SamplePlan& plan, Rng& rng) {
  std::vector<double> x(std::size_t(A.n()), 0.0);
  for (int i = 0; i < A.n(); ++i) {
    double lo = -1.0, hi = 1.0;
    if (std::size_t(i) < plan.box.size()) {
      lo = plan.box[std::size_t(i)][0];
      hi = plan.box[std::size_t(i)][1];
    }
    x[std::size_t(i)] = rng.uniform(lo, hi);
  }
  return x;
}

double StructureReport::residual(const std::string& identity) const {
  for (const auto& row : identities)
    if (row.identity == identity) return row.max_residual;
  throw_invalid("no residual recorded for identity '" + identity + "'");
}

StructureReport check_structure(const LieAlgebroid& A, const SamplePlan& plan, double tol) {
  const int n = A.n(), m = A.m();
  StructureReport report;
  report.tol = tol;
  IdentityResidual antisym{"antisymmetry", 0.0, {}};
  IdentityResidual compat{"anchor_bracket", 0.0, {}};
  IdentityResidual jacobi{"jacobi", 0.0, {}};

  Rng rng(plan.seed);
  for (int s = 0; s < plan.count; ++s) {
    const std::vector<double> xd = sample_base_point(A, plan, rng);

    // Plain values at the point.
    std::vector<Scalar> xs(xd.begin(), xd.end());
    // Perturbation-seeded copies give d/dx^l of anchor and structure entries.
    // seeded[l] carries a unit delta on coordinate l.
    std::vector<std::vector<Scalar>> seeded(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
      auto& pt = seeded[std::size_t(l)];
      pt.reserve(std::size_t(n));
      for (int j = 0; j < n; ++j)
        pt.push_back(Scalar::dual(Scalar(xd[std::size_t(j)]), Scalar(j == l ? 1.0 : 0.0)));
    }
    auto delta_of = [](const Scalar& v) {
      return v.is_dual() ? v.dual_delta().as_double() : 0.0;
    };

    auto track = [&](IdentityResidual& row, double value) {
      const double r = std::abs(value);
      if (r > row.max_residual) {
        row.max_residual = r;
        row.worst_point = xd;
      }
    };

    double c_val[5 * 5 * 5]; // dense cache, m <= 5 in every catalog system
    if (m > 5) throw_config("structure check supports fiber rank up to 5");
    for (int g = 0; g < m; ++g)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          c_val[(g * m + a) * m + b] = A.c_at(g, a, b, xs).as_double();
    auto Cv = [&](int g, int a, int b) { return c_val[(g * m + a) * m + b]; };

    for (int g = 0; g < m; ++g)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          track(antisym, Cv(g, a, b) + Cv(g, b, a));

    // rho values and partials
    std::vector<double> rho_v(std::size_t(n) * std::size_t(m), 0.0);
    std::vector<double> rho_d(std::size_t(n) * std::size_t(m) * std::size_t(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a) {
        rho_v[std::size_t(i * m + a)] = A.rho_at(i, a, xs).as_double();
        for (int l = 0; l < n; ++l)
          rho_d[std::size_t((i * m + a) * n + l)] =
              delta_of(A.rho_at(i, a, seeded[std::size_t(l)]));
      }
    auto Rv = [&](int i, int a) { return rho_v[std::size_t(i * m + a)]; };
    auto Rd = [&](int i, int a, int l) { return rho_d[std::size_t((i * m + a) * n + l)]; };

    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        for (int i = 0; i < n; ++i) {
          double lie = 0.0;
          for (int l = 0; l < n; ++l) lie += Rv(l, a) * Rd(i, b, l) - Rv(l, b) * Rd(i, a, l);
          double rhs = 0.0;
          for (int g = 0; g < m; ++g) rhs += Rv(i, g) * Cv(g, a, b);
          track(compat, lie - rhs);
        }

    // Jacobi cyclic sum: rho^l_alpha dC^nu_{beta gamma}/dx^l + C^nu_{alpha mu} C^mu_{beta gamma},
    // cycled over (alpha, beta, gamma), for every nu and every triple.
    std::vector<double> c_d(std::size_t(m) * std::size_t(m) * std::size_t(m) * std::size_t(n), 0.0);
    for (int g = 0; g < m; ++g)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int l = 0; l < n; ++l)
            c_d[std::size_t(((g * m + a) * m + b) * n + l)] =
                delta_of(A.c_at(g, a, b, seeded[std::size_t(l)]));
    auto Cd = [&](int g, int a, int b, int l) {
      return c_d[std::size_t(((g * m + a) * m + b) * n + l)];
    };
    auto one_term = [&](int nu, int al, int be, int ga) {
      double t = 0.0;
      for (int l = 0; l < n; ++l) t += Rv(l, al) * Cd(nu, be, ga, l);
      for (int mu = 0; mu < m; ++mu) t += Cv(nu, al, mu) * Cv(mu, be, ga);
      return t;
    };
    for (int nu = 0; nu < m; ++nu)
      for (int al = 0; al < m; ++al)
        for (int be = 0; be < m; ++be)
          for (int ga = 0; ga < m; ++ga) {
            const double cyc = one_term(nu, al, be, ga) + one_term(nu, be, ga, al) +
                               one_term(nu, ga, al, be);
            track(jacobi, cyc);
          }
  }

  report.identities = {antisym, compat, jacobi};
  report.passed = antisym.max_residual <= tol && compat.max_residual <= tol &&
                  jacobi.max_residual <= tol;
  return report;
}

// ---- catalog ---------------------------------------------------------------

namespace {

std::vector<std::vector<Expr>> parse_matrix(int rows, int cols,
                                            const std::vector<std::vector<std::string>>& src,
                                            const char* what) {
  if (src.size() != std::size_t(rows))
    throw_config(std::string(what) + ": expected " + std::to_string(rows) + " rows");
  std::vector<std::vector<Expr>> out(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    if (src[std::size_t(i)].size() != std::size_t(cols))
      throw_config(std::string(what) + ": expected " + std::to_string(cols) + " columns");
    out[std::size_t(i)].reserve(std::size_t(cols));
    for (const auto& s : src[std::size_t(i)]) out[std::size_t(i)].push_back(parse_expr(s));
  }
  return out;
}

std::vector<CEntry> constant_entries(const std::vector<ConstantEntry>& cs) {
  std::vector<CEntry> out;
  out.reserve(cs.size());
  for (const auto& c : cs) out.push_back({c.gamma, c.alpha, c.beta, expr_number(c.value)});
  return out;
}

} // namespace

AlgebroidPtr make_tangent(int n) {
  if (n < 1) throw_config("tangent algebroid needs n >= 1");
  std::vector<std::vector<Expr>> rho(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rho[std::size_t(i)].resize(std::size_t(n));
    for (int a = 0; a < n; ++a) rho[std::size_t(i)][std::size_t(a)] = expr_number(i == a ? 1.0 : 0.0);
  }
  return std::make_shared<const LieAlgebroid>("tangent(" + std::to_string(n) + ")", n, n,
                                              std::move(rho), std::vector<CEntry>{});
}

AlgebroidPtr make_lie_algebra(int m, const std::vector<ConstantEntry>& constants,
                              const std::string& name) {
  if (m < 1) throw_config("lie_algebra needs m >= 1");
  return std::make_shared<const LieAlgebroid>(name, 0, m, std::vector<std::vector<Expr>>{},
                                              constant_entries(constants));
}

AlgebroidPtr make_quasi_velocity(int n, const std::vector<std::vector<std::string>>& rho_exprs,
                                 const std::vector<CEntry>& entries, const std::string& name) {
  if (n < 1) throw_config("quasi_velocity needs n >= 1");
  return std::make_shared<const LieAlgebroid>(name, n, n, parse_matrix(n, n, rho_exprs, "rho"),
                                              entries);
}

AlgebroidPtr make_action(int n, int m, const std::vector<ConstantEntry>& constants,
                         const std::vector<std::vector<std::string>>& generator_exprs,
                         const std::string& name) {
  if (n < 1 || m < 1) throw_config("action algebroid needs n >= 1, m >= 1");
  return std::make_shared<const LieAlgebroid>(name, n, m,
                                              parse_matrix(n, m, generator_exprs, "generators"),
                                              constant_entries(constants));
}

AlgebroidPtr make_atiyah_trivial(int n, int m_g, const std::vector<ConstantEntry>& constants,
                                 const std::string& name) {
  if (n < 1 || m_g < 1) throw_config("atiyah_trivial needs n >= 1, m_g >= 1");
  const int m = n + m_g;
  std::vector<std::vector<Expr>> rho(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rho[std::size_t(i)].resize(std::size_t(m));
    for (int a = 0; a < m; ++a)
      rho[std::size_t(i)][std::size_t(a)] = expr_number(i == a ? 1.0 : 0.0);
  }
  std::vector<CEntry> shifted;
  shifted.reserve(constants.size());
  for (const auto& c : constants)
    shifted.push_back({c.gamma + n, c.alpha + n, c.beta + n, expr_number(c.value)});
  return std::make_shared<const LieAlgebroid>(name, n, m, std::move(rho), shifted);
}

std::vector<ConstantEntry> so3_constants() {
  return {{2, 0, 1, 1.0}, {0, 1, 2, 1.0}, {1, 2, 0, 1.0}};
}

std::vector<ConstantEntry> heisenberg_constants() { return {{2, 0, 1, 1.0}}; }

} // namespace liejet
