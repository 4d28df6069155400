#include "liejet/jet.hpp"

#include <charconv>
#include <functional>
#include <string>
#include <string_view>

#include "liejet/error.hpp"

namespace liejet {

namespace {

double factorial(int r) {
  double f = 1.0;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

bool parse_index(std::string_view s, int& out) {
  if (s.empty()) return false;
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return false;
  out = v;
  return true;
}

/// Jet level of a coordinate name (0 for base coordinates); throws on
/// anything that is not a coordinate of the given jet space. bare y<alpha>
/// is reported so callers can canonicalize it to y<alpha>_1.
int coord_level(const std::string& name, int n, int m, bool& bare_velocity) {
  bare_velocity = false;
  auto malformed = [&]() {
    throw_config("unknown variable '" + name + "' (expected x<i>, y<a> or y<a>_<r>)");
  };
  if (name.size() >= 2 && name[0] == 'x') {
    int i = 0;
    if (!parse_index(std::string_view(name).substr(1), i)) malformed();
    if (i < 1 || i > n)
      throw_config("base coordinate '" + name + "' out of range (base dimension " +
                   std::to_string(n) + ")");
    return 0;
  }
  if (name.size() >= 2 && name[0] == 'y') {
    std::string_view rest = std::string_view(name).substr(1);
    auto us = rest.find('_');
    int alpha = 0, r = 1;
    if (us == std::string_view::npos) {
      if (!parse_index(rest, alpha)) malformed();
      bare_velocity = true;
    } else {
      if (!parse_index(rest.substr(0, us), alpha)) malformed();
      if (!parse_index(rest.substr(us + 1), r)) malformed();
      if (r < 1) throw_config("velocity level in '" + name + "' must be >= 1");
    }
    if (alpha < 1 || alpha > m)
      throw_config("velocity coordinate '" + name + "' out of range (rank " +
                   std::to_string(m) + ")");
    return r;
  }
  malformed();
  return 0;
}

FnPtr make_node(FnNode node) { return std::make_shared<const FnNode>(std::move(node)); }

/// Adopt a child's jet space; constants (m == 0) attach anywhere.
void merge_dims(FnNode& node, const FnPtr& kid) {
  if (kid->m == 0) return;
  if (node.m == 0) {
    node.n = kid->n;
    node.m = kid->m;
    return;
  }
  if (node.n != kid->n || node.m != kid->m)
    throw_shape("functions belong to different jet spaces");
}

} // namespace

std::string jet_slot_name(int n, int m, int slot) {
  if (slot < n) return "x" + std::to_string(slot + 1);
  const int r = (slot - n) / m + 1;
  const int a = (slot - n) % m;
  return "y" + std::to_string(a + 1) + "_" + std::to_string(r);
}

JetVals::JetVals(int n, int m, int k) : n_(n), m_(m), k_(k) {
  if (n < 0 || m < 1 || k < 0) throw_invalid("jet needs n >= 0, m >= 1, k >= 0");
  q_.assign(static_cast<std::size_t>(jet_slot_count(n, m, k)), Scalar(0.0));
}

JetVals::JetVals(int n, int m, int k, std::span<const double> entries) : JetVals(n, m, k) {
  if (entries.size() != q_.size())
    throw_shape("jet of order " + std::to_string(k) + " holds " + std::to_string(q_.size()) +
                " entries, got " + std::to_string(entries.size()));
  for (std::size_t i = 0; i < q_.size(); ++i) q_[i] = Scalar(entries[i]);
}

std::size_t JetVals::check(int slot) const {
  if (slot < 0 || static_cast<std::size_t>(slot) >= q_.size())
    throw_shape("jet slot " + std::to_string(slot) + " out of range for order " +
                std::to_string(k_));
  return static_cast<std::size_t>(slot);
}

std::vector<double> JetVals::to_doubles() const {
  std::vector<double> out;
  out.reserve(q_.size());
  for (const auto& s : q_) out.push_back(s.as_double());
  return out;
}

JetVals sample_jet(int n, int m, int k, Rng& rng, double lo, double hi) {
  JetVals P(n, m, k);
  for (int i = 0; i < P.size(); ++i) P.at(i) = Scalar(rng.uniform(lo, hi));
  return P;
}

JetVals sample_plan_jet(const LieAlgebroid& A, int order, const SamplePlan& plan, Rng& rng) {
  JetVals P(A.n(), A.m(), order);
  std::vector<double> base = sample_base_point(A, plan, rng);
  for (int i = 0; i < A.n(); ++i) P.x(i) = Scalar(base[i]);
  for (int s = A.n(); s < P.size(); ++s)
    P.at(s) = Scalar(rng.uniform(plan.fiber_box[0], plan.fiber_box[1]));
  return P;
}

JetVals jet_curve(const LieAlgebroid& A, const JetVals& P, int k0, int D) {
  const int n = A.n(), m = A.m();
  if (P.n() != n || P.m() != m)
    throw_shape("jet does not belong to algebroid '" + A.name() + "'");
  if (k0 < 0 || D < 0) throw_invalid("jet_curve needs k0 >= 0 and degree >= 0");
  if (P.k() < k0 + D)
    throw_shape("prolongation curve of order " + std::to_string(k0) + ", degree " +
                std::to_string(D) + " needs a jet of order >= " + std::to_string(k0 + D) +
                ", got order " + std::to_string(P.k()));

  JetVals curve(n, m, k0);

  // y_r(t) = sum_s y_{r+s} t^s / s!. Levels beyond P.k() (reachable only by
  // the internal y_1 when k0 = 0) contribute zero; integration never reads
  // the affected top coefficient.
  auto level_curve = [&](int r, int a) {
    std::vector<Scalar> c(static_cast<std::size_t>(D) + 1, Scalar(0.0));
    double s_fact = 1.0;
    for (int s = 0; s <= D; ++s) {
      if (s >= 2) s_fact *= s;
      if (r + s <= P.k()) c[static_cast<std::size_t>(s)] = P.y(r + s, a) * (1.0 / s_fact);
    }
    return Scalar::taylor(std::move(c));
  };

  for (int r = 1; r <= k0; ++r)
    for (int a = 0; a < m; ++a) curve.y(r, a) = level_curve(r, a);

  if (n == 0) return curve;

  std::vector<Scalar> y1(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) y1[static_cast<std::size_t>(a)] = level_curve(1, a);

  bool rho_varies = false;
  for (int i = 0; i < n && !rho_varies; ++i)
    for (int a = 0; a < m && !rho_varies; ++a) {
      const Expr& e = A.rho_expr(i, a);
      if (e && !free_variables(e).empty()) rho_varies = true;
    }

  // dx/dt = rho(x(t)) y_1(t) by Picard iteration; round j fixes the degree-j
  // coefficients, so D rounds settle everything (one round if rho is
  // constant). Coefficient lists are assembled directly so no operation ever
  // mixes a Taylor scalar with a bare entry of P.
  std::vector<Scalar> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<Scalar> c(static_cast<std::size_t>(D) + 1, Scalar(0.0));
    c[0] = P.x(i);
    xs[static_cast<std::size_t>(i)] = Scalar::taylor(std::move(c));
  }
  const int rounds = D == 0 ? 0 : (rho_varies ? D : 1);
  for (int round = 0; round < rounds; ++round) {
    std::vector<Scalar> next(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Scalar rate(0.0);
      for (int a = 0; a < m; ++a)
        rate += A.rho_at(i, a, xs) * y1[static_cast<std::size_t>(a)];
      std::vector<Scalar> c(static_cast<std::size_t>(D) + 1, Scalar(0.0));
      c[0] = P.x(i);
      for (int s = 1; s <= D; ++s)
        c[static_cast<std::size_t>(s)] = rate.coeff(s - 1) * (1.0 / s);
      next[static_cast<std::size_t>(i)] = Scalar::taylor(std::move(c));
    }
    xs = std::move(next);
  }
  for (int i = 0; i < n; ++i) curve.x(i) = xs[static_cast<std::size_t>(i)];
  return curve;
}

// ---- factories -------------------------------------------------------------

FnPtr fn_constant(double value) {
  FnNode node;
  node.kind = FnKind::constant;
  node.value = value;
  return make_node(std::move(node));
}

FnPtr fn_coordinate(int n, int m, int slot) {
  if (n < 0 || m < 1) throw_invalid("coordinate needs n >= 0, m >= 1");
  if (slot < 0) throw_invalid("negative jet slot");
  FnNode node;
  node.kind = FnKind::coordinate;
  node.n = n;
  node.m = m;
  node.slot = slot;
  node.order = jet_slot_level(n, m, slot);
  return make_node(std::move(node));
}

FnPtr fn_x(int n, int m, int i) {
  if (i < 0 || i >= n) throw_invalid("base coordinate index out of range");
  return fn_coordinate(n, m, jet_x_slot(i));
}

FnPtr fn_y(int n, int m, int r, int alpha) {
  if (r < 1 || alpha < 0 || alpha >= m) throw_invalid("velocity coordinate index out of range");
  return fn_coordinate(n, m, jet_y_slot(n, m, r, alpha));
}

FnPtr fn_expression(int n, int m, const Expr& e) {
  if (!e) throw_invalid("expression is null");
  if (n < 0 || m < 1) throw_invalid("expression needs n >= 0, m >= 1");
  const std::set<std::string> fv = free_variables(e);
  if (fv.empty()) return fn_constant(eval(e, Env{}).as_double());

  std::map<std::string, Expr> alias;
  int order = 0;
  for (const std::string& name : fv) {
    bool bare = false;
    const int level = coord_level(name, n, m, bare);
    order = std::max(order, level);
    if (bare) alias.emplace(name, expr_variable(name + "_1"));
  }
  order = std::max(order, 0);
  const Expr src = alias.empty() ? e : substitute(e, alias);

  const int count = jet_slot_count(n, m, order);
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) names.push_back(jet_slot_name(n, m, s));

  FnNode node;
  node.kind = FnKind::expression;
  node.n = n;
  node.m = m;
  node.order = order;
  node.bound = BoundExpr(src, names);
  return make_node(std::move(node));
}

FnPtr fn_sum(std::vector<FnPtr> terms, std::vector<double> weights) {
  if (terms.size() != weights.size()) throw_invalid("fn_sum needs one weight per term");
  FnNode node;
  node.kind = FnKind::weighted_sum;
  double constant = 0.0;
  std::vector<FnPtr> kids;
  std::vector<double> ws;
  std::function<void(const FnPtr&, double)> add = [&](const FnPtr& t, double w) {
    if (!t) throw_invalid("summed function is null");
    if (w == 0.0) return;
    if (t->kind == FnKind::constant) {
      constant += w * t->value;
      return;
    }
    if (t->kind == FnKind::weighted_sum) {
      for (std::size_t j = 0; j < t->kids.size(); ++j) add(t->kids[j], w * t->weights[j]);
      return;
    }
    merge_dims(node, t);
    node.order = std::max(node.order, t->order);
    kids.push_back(t);
    ws.push_back(w);
  };
  for (std::size_t i = 0; i < terms.size(); ++i) add(terms[i], weights[i]);

  if (kids.empty()) return fn_constant(constant);
  if (constant != 0.0) {
    kids.push_back(fn_constant(constant));
    ws.push_back(1.0);
  }
  if (kids.size() == 1 && ws[0] == 1.0) return kids[0];
  node.kids = std::move(kids);
  node.weights = std::move(ws);
  return make_node(std::move(node));
}

FnPtr fn_add(const FnPtr& a, const FnPtr& b) { return fn_sum({a, b}, {1.0, 1.0}); }
FnPtr fn_sub(const FnPtr& a, const FnPtr& b) { return fn_sum({a, b}, {1.0, -1.0}); }
FnPtr fn_scale(double w, const FnPtr& f) { return fn_sum({f}, {w}); }

FnPtr fn_product(std::vector<FnPtr> factors) {
  FnNode node;
  node.kind = FnKind::product;
  double constant = 1.0;
  std::vector<FnPtr> kids;
  std::function<void(const FnPtr&)> mul = [&](const FnPtr& f) {
    if (!f) throw_invalid("multiplied function is null");
    if (f->kind == FnKind::constant) {
      constant *= f->value;
      return;
    }
    if (f->kind == FnKind::product) {
      for (const auto& kid : f->kids) mul(kid);
      return;
    }
    if (f->kind == FnKind::weighted_sum && f->kids.size() == 1) {
      // a scaled factor: pull the weight out of the product
      constant *= f->weights[0];
      mul(f->kids[0]);
      return;
    }
    merge_dims(node, f);
    node.order = std::max(node.order, f->order);
    kids.push_back(f);
  };
  for (const auto& f : factors) mul(f);

  if (constant == 0.0) return fn_constant(0.0);
  if (kids.empty()) return fn_constant(constant);
  FnPtr prod;
  if (kids.size() == 1) {
    prod = kids[0];
  } else {
    node.kids = std::move(kids);
    prod = make_node(std::move(node));
  }
  return constant == 1.0 ? prod : fn_scale(constant, prod);
}

FnPtr fn_mul(const FnPtr& a, const FnPtr& b) { return fn_product({a, b}); }

FnPtr fn_total_derivative(const FnPtr& f, int r) {
  if (!f) throw_invalid("derived function is null");
  if (r < 0) throw_invalid("total derivative order must be >= 0");
  if (r == 0) return f;
  if (f->kind == FnKind::constant) return fn_constant(0.0);
  if (f->kind == FnKind::weighted_sum) {
    std::vector<FnPtr> kids;
    kids.reserve(f->kids.size());
    for (const auto& kid : f->kids) kids.push_back(fn_total_derivative(kid, r));
    return fn_sum(std::move(kids), f->weights);
  }
  if (f->kind == FnKind::coordinate && f->slot >= f->n) {
    // the derivative of a velocity coordinate is the next level up
    return fn_coordinate(f->n, f->m, f->slot + r * f->m);
  }
  if (f->kind == FnKind::total_derivative) return fn_total_derivative(f->kids[0], f->deriv + r);
  FnNode node;
  node.kind = FnKind::total_derivative;
  node.n = f->n;
  node.m = f->m;
  node.order = f->order + r;
  node.deriv = r;
  node.kids = {f};
  return make_node(std::move(node));
}

FnPtr fn_partial(const FnPtr& f, int slot) {
  if (!f) throw_invalid("derived function is null");
  if (slot < 0) throw_invalid("negative jet slot");
  if (f->kind == FnKind::constant) return fn_constant(0.0);
  if (slot >= jet_slot_count(f->n, f->m, f->order)) return fn_constant(0.0);
  if (f->kind == FnKind::coordinate) return fn_constant(f->slot == slot ? 1.0 : 0.0);
  if (f->kind == FnKind::expression)
    // closed form, and the result's declared order shrinks to what the
    // derivative actually reads
    return fn_expression(f->n, f->m,
                         differentiate(f->bound.source(), jet_slot_name(f->n, f->m, slot)));
  if (f->kind == FnKind::weighted_sum) {
    std::vector<FnPtr> kids;
    kids.reserve(f->kids.size());
    for (const auto& kid : f->kids) kids.push_back(fn_partial(kid, slot));
    return fn_sum(std::move(kids), f->weights);
  }
  FnNode node;
  node.kind = FnKind::partial;
  node.n = f->n;
  node.m = f->m;
  node.order = f->order;
  node.slot = slot;
  node.kids = {f};
  return make_node(std::move(node));
}

// ---- evaluation ------------------------------------------------------------

Scalar EvalContext::eval(const FnPtr& f) {
  if (!f) throw_invalid("evaluated function is null");
  if (f->m != 0 && (f->n != P_.n() || f->m != P_.m()))
    throw_shape("function on jets of (n=" + std::to_string(f->n) + ", m=" + std::to_string(f->m) +
                ") evaluated at a jet of (n=" + std::to_string(P_.n()) +
                ", m=" + std::to_string(P_.m()) + ")");
  if (f->order > P_.k())
    throw_shape("order-" + std::to_string(f->order) + " function evaluated at an order-" +
                std::to_string(P_.k()) + " jet");
  auto it = memo_.find(f);
  if (it != memo_.end()) return it->second;
  Scalar v = eval_node(f.get());
  memo_.emplace(f, v);
  return v;
}

Scalar EvalContext::eval_node(const FnNode* f) {
  switch (f->kind) {
    case FnKind::constant:
      return Scalar(f->value);
    case FnKind::coordinate:
      return P_.at(f->slot);
    case FnKind::expression:
      return f->bound.eval(P_.slots());
    case FnKind::weighted_sum: {
      Scalar acc(0.0);
      for (std::size_t i = 0; i < f->kids.size(); ++i)
        acc += Scalar(f->weights[i]) * eval(f->kids[i]);
      return acc;
    }
    case FnKind::product: {
      Scalar acc(1.0);
      for (const auto& kid : f->kids) acc *= eval(kid);
      return acc;
    }
    case FnKind::total_derivative: {
      const FnPtr& base = f->kids[0];
      Scalar along = curve_context(base->order, f->deriv).eval(base);
      return Scalar(factorial(f->deriv)) * along.coeff(f->deriv);
    }
    case FnKind::partial:
      return delta_component(seeded_context(f->slot).eval(f->kids[0]));
  }
  throw_invalid("unknown function node kind");
}

EvalContext& EvalContext::curve_context(int k0, int degree) {
  const auto key = std::make_pair(k0, degree);
  auto it = curves_.find(key);
  if (it == curves_.end()) {
    it = curves_.emplace(key, Child{}).first;
    it->second.point = jet_curve(A_, P_, k0, degree);
    it->second.ctx = std::make_unique<EvalContext>(A_, it->second.point);
  }
  return *it->second.ctx;
}

EvalContext& EvalContext::seeded_context(int slot) {
  auto it = seeded_.find(slot);
  if (it == seeded_.end()) {
    // every slot is seeded so all entries share one shape; only the
    // requested direction carries a unit delta
    JetVals S(P_.n(), P_.m(), P_.k());
    for (int j = 0; j < S.size(); ++j) {
      const Scalar& v = P_.at(j);
      S.at(j) = Scalar::dual(v, j == slot ? v.one_like() : v.zero_like());
    }
    it = seeded_.emplace(slot, Child{}).first;
    it->second.point = std::move(S);
    it->second.ctx = std::make_unique<EvalContext>(A_, it->second.point);
  }
  return *it->second.ctx;
}

Scalar eval_at(const FnPtr& f, const LieAlgebroid& A, const JetVals& P) {
  EvalContext ctx(A, P);
  return ctx.eval(f);
}

} // namespace liejet
