#include "liejet/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <sstream>

namespace liejet {

Expr expr_number(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::number;
  n->value = v;
  return n;
}

Expr expr_variable(const std::string& name) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::variable;
  n->name = name;
  return n;
}

Expr expr_unary(ExprOp op, Expr a) {
  // negation of a literal is the negative literal; keeps every negative
  // number in one canonical form (see the grammar note)
  if (op == ExprOp::neg && a && a->op == ExprOp::number) return expr_number(-a->value);
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

Expr expr_binary(ExprOp op, Expr a, Expr b) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr expr_call(Elementary fn, Expr a) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::call;
  n->fn = fn;
  n->a = std::move(a);
  switch (fn) {
    case Elementary::sin_fn: n->name = "sin"; break;
    case Elementary::cos_fn: n->name = "cos"; break;
    case Elementary::exp_fn: n->name = "exp"; break;
    case Elementary::log_fn: n->name = "log"; break;
    case Elementary::sqrt_fn: n->name = "sqrt"; break;
    case Elementary::tan_fn: n->name = "tan"; break;
    case Elementary::tanh_fn: n->name = "tanh"; break;
  }
  return n;
}

Expr expr_pi() {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::constant;
  n->name = "pi";
  n->value = 3.14159265358979323846;
  return n;
}

namespace {

std::optional<Elementary> function_by_name(const std::string& s) {
  if (s == "sin") return Elementary::sin_fn;
  if (s == "cos") return Elementary::cos_fn;
  if (s == "exp") return Elementary::exp_fn;
  if (s == "log") return Elementary::log_fn;
  if (s == "sqrt") return Elementary::sqrt_fn;
  if (s == "tan") return Elementary::tan_fn;
  if (s == "tanh") return Elementary::tanh_fn;
  return std::nullopt;
}

struct Parser {
  const std::string& src;
  std::size_t pos = 0;

  explicit Parser(const std::string& s) : src(s) {}

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= src.size();
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  bool accept(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  Expr parse_expr_rule() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = expr_binary(ExprOp::add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = expr_binary(ExprOp::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = expr_binary(ExprOp::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = expr_binary(ExprOp::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    // expr_unary folds a minus on a literal into the literal, so printed
    // negative numbers reparse to the identical tree
    if (accept('-')) return expr_unary(ExprOp::neg, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) {
      // right associative; allows a signed exponent: a ^ -b
      return expr_binary(ExprOp::pow, base, parse_unary());
    }
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos >= src.size()) throw_parse("unexpected end of expression", pos);
    const char c = src[pos];
    if (c == '(') {
      const std::size_t open = pos;
      ++pos;
      Expr inner = parse_expr_rule();
      if (!accept(')')) throw_parse("unbalanced '(' opened", open);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    throw_parse(std::string("unexpected character '") + c + "'", pos);
  }

  Expr parse_number() {
    const std::size_t start = pos;
    const char* begin = src.c_str() + start;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw_parse("malformed number", start);
    pos = start + static_cast<std::size_t>(end - begin);
    return expr_number(v);
  }

  Expr parse_name() {
    const std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    const std::string name = src.substr(start, pos - start);
    if (name == "pi") return expr_pi();
    if (auto fn = function_by_name(name)) {
      if (!accept('(')) throw_parse("function '" + name + "' needs '('", pos);
      const std::size_t open = pos - 1;
      Expr arg = parse_expr_rule();
      if (!accept(')')) throw_parse("unbalanced '(' opened", open);
      return expr_call(*fn, arg);
    }
    return expr_variable(name);
  }
};

} // namespace

Expr parse_expr(const std::string& src) {
  Parser p(src);
  Expr e = p.parse_expr_rule();
  if (!p.at_end()) throw_parse("trailing input", p.pos);
  return e;
}

namespace {

// Binding strength used for minimal parenthesisation.
int precedence(const Expr& e) {
  switch (e->op) {
    case ExprOp::add:
    case ExprOp::sub: return 1;
    case ExprOp::mul:
    case ExprOp::div: return 2;
    case ExprOp::neg: return 3;
    case ExprOp::pow: return 4;
    case ExprOp::number:
      // negative literals print with a leading '-', so they bind like a negation
      return std::signbit(e->value) ? 3 : 5;
    default: return 5; // atoms
  }
}

void print(const Expr& e, std::ostream& os);

void print_child(const Expr& child, int min_prec, std::ostream& os) {
  if (precedence(child) < min_prec) {
    os << "(";
    print(child, os);
    os << ")";
  } else {
    print(child, os);
  }
}

void print(const Expr& e, std::ostream& os) {
  switch (e->op) {
    case ExprOp::number: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << e->value;
      std::string s = tmp.str();
      if (!s.empty() && s[0] == '-') {
        // negative literals print as a negation so the grammar stays closed
        os << "-" << s.substr(1);
      } else {
        os << s;
      }
      return;
    }
    case ExprOp::constant:
      os << e->name;
      return;
    case ExprOp::variable:
      os << e->name;
      return;
    case ExprOp::neg:
      os << "-";
      print_child(e->a, 3, os);
      return;
    case ExprOp::add:
      print_child(e->a, 1, os);
      os << " + ";
      print_child(e->b, 2, os);
      return;
    case ExprOp::sub:
      print_child(e->a, 1, os);
      os << " - ";
      print_child(e->b, 2, os);
      return;
    case ExprOp::mul:
      print_child(e->a, 2, os);
      os << " * ";
      print_child(e->b, 3, os);
      return;
    case ExprOp::div:
      print_child(e->a, 2, os);
      os << " / ";
      print_child(e->b, 3, os);
      return;
    case ExprOp::pow:
      print_child(e->a, 5, os);
      os << "^";
      // exponent may be a unary chain; pow itself re-parses right associative
      print_child(e->b, 3, os);
      return;
    case ExprOp::call:
      os << e->name << "(";
      print(e->a, os);
      os << ")";
      return;
  }
}

} // namespace

std::string pretty_print(const Expr& e) {
  std::ostringstream os;
  print(e, os);
  return os.str();
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op) return false;
  switch (a->op) {
    case ExprOp::number: return a->value == b->value;
    case ExprOp::constant: return a->name == b->name;
    case ExprOp::variable: return a->name == b->name;
    case ExprOp::call:
      return a->fn == b->fn && expr_equal(a->a, b->a);
    case ExprOp::neg: return expr_equal(a->a, b->a);
    default:
      return expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
  }
}

namespace {

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->op == ExprOp::variable) out.insert(e->name);
  collect_vars(e->a, out);
  collect_vars(e->b, out);
}

} // namespace

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
  if (!e) return e;
  if (e->op == ExprOp::variable) {
    auto it = bindings.find(e->name);
    return it == bindings.end() ? e : it->second;
  }
  if (!e->a && !e->b) return e;
  Expr a = substitute(e->a, bindings);
  Expr b = substitute(e->b, bindings);
  if (a == e->a && b == e->b) return e;
  auto n = std::make_shared<ExprNode>(*e);
  n->a = a;
  n->b = b;
  return n;
}

namespace {

bool is_number(const Expr& e, double v) { return e->op == ExprOp::number && e->value == v; }
bool is_zero(const Expr& e) { return is_number(e, 0.0); }

// folding constructors keep differentiated trees compact
Expr mk_add(Expr a, Expr b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  if (a->op == ExprOp::number && b->op == ExprOp::number) return expr_number(a->value + b->value);
  return expr_binary(ExprOp::add, std::move(a), std::move(b));
}

Expr mk_sub(Expr a, Expr b) {
  if (is_zero(b)) return a;
  if (a->op == ExprOp::number && b->op == ExprOp::number) return expr_number(a->value - b->value);
  if (is_zero(a)) return b->op == ExprOp::number ? expr_number(-b->value)
                                                 : expr_unary(ExprOp::neg, std::move(b));
  return expr_binary(ExprOp::sub, std::move(a), std::move(b));
}

Expr mk_mul(Expr a, Expr b) {
  if (is_zero(a) || is_zero(b)) return expr_number(0.0);
  if (is_number(a, 1.0)) return b;
  if (is_number(b, 1.0)) return a;
  if (a->op == ExprOp::number && b->op == ExprOp::number) return expr_number(a->value * b->value);
  return expr_binary(ExprOp::mul, std::move(a), std::move(b));
}

Expr mk_div(Expr a, Expr b) {
  if (is_zero(a)) return expr_number(0.0);
  if (is_number(b, 1.0)) return a;
  return expr_binary(ExprOp::div, std::move(a), std::move(b));
}

Expr mk_neg(Expr a) {
  if (a->op == ExprOp::number) return expr_number(-a->value);
  return expr_unary(ExprOp::neg, std::move(a));
}

} // namespace

Expr differentiate(const Expr& e, const std::string& var) {
  if (!e) throw_invalid("null expression");
  switch (e->op) {
    case ExprOp::number:
    case ExprOp::constant:
      return expr_number(0.0);
    case ExprOp::variable:
      return expr_number(e->name == var ? 1.0 : 0.0);
    case ExprOp::neg:
      return mk_neg(differentiate(e->a, var));
    case ExprOp::add:
      return mk_add(differentiate(e->a, var), differentiate(e->b, var));
    case ExprOp::sub:
      return mk_sub(differentiate(e->a, var), differentiate(e->b, var));
    case ExprOp::mul:
      return mk_add(mk_mul(differentiate(e->a, var), e->b),
                    mk_mul(e->a, differentiate(e->b, var)));
    case ExprOp::div:
      // (a/b)' = a'/b - a b'/b^2
      return mk_sub(mk_div(differentiate(e->a, var), e->b),
                    mk_div(mk_mul(e->a, differentiate(e->b, var)),
                           mk_mul(e->b, e->b)));
    case ExprOp::pow: {
      const Expr da = differentiate(e->a, var);
      const Expr db = differentiate(e->b, var);
      if (is_zero(db) && e->b->op == ExprOp::number) {
        // constant exponent: c a^(c-1) a', defined wherever a^c is
        const double c = e->b->value;
        if (c == 0.0) return expr_number(0.0);
        return mk_mul(mk_mul(expr_number(c),
                             expr_binary(ExprOp::pow, e->a, expr_number(c - 1.0))),
                      da);
      }
      // a^b (b' log a + b a' / a)
      return mk_mul(e, mk_add(mk_mul(db, expr_call(Elementary::log_fn, e->a)),
                              mk_div(mk_mul(e->b, da), e->a)));
    }
    case ExprOp::call: {
      const Expr da = differentiate(e->a, var);
      if (is_zero(da)) return expr_number(0.0);
      Expr outer;
      switch (e->fn) {
        case Elementary::sin_fn: outer = expr_call(Elementary::cos_fn, e->a); break;
        case Elementary::cos_fn: outer = mk_neg(expr_call(Elementary::sin_fn, e->a)); break;
        case Elementary::exp_fn: outer = e; break;
        case Elementary::log_fn: return mk_div(da, e->a);
        case Elementary::sqrt_fn: return mk_div(da, mk_mul(expr_number(2.0), e));
        case Elementary::tan_fn:
          outer = mk_add(expr_number(1.0), mk_mul(e, e));
          break;
        case Elementary::tanh_fn:
          outer = mk_sub(expr_number(1.0), mk_mul(e, e));
          break;
      }
      return mk_mul(std::move(outer), da);
    }
  }
  throw_invalid("unknown expression node");
}

namespace {

Scalar eval_node(const ExprNode& e, const Env& env) {
  switch (e.op) {
    case ExprOp::number: return Scalar(e.value);
    case ExprOp::constant: return Scalar(e.value);
    case ExprOp::variable: {
      auto it = env.find(e.name);
      if (it == env.end()) throw_config("unbound variable '" + e.name + "'");
      return it->second;
    }
    case ExprOp::neg: return -eval_node(*e.a, env);
    case ExprOp::add: return eval_node(*e.a, env) + eval_node(*e.b, env);
    case ExprOp::sub: return eval_node(*e.a, env) - eval_node(*e.b, env);
    case ExprOp::mul: return eval_node(*e.a, env) * eval_node(*e.b, env);
    case ExprOp::div: return eval_node(*e.a, env) / eval_node(*e.b, env);
    case ExprOp::pow: return pow(eval_node(*e.a, env), eval_node(*e.b, env));
    case ExprOp::call: {
      Scalar a = eval_node(*e.a, env);
      switch (e.fn) {
        case Elementary::sin_fn: return sin(a);
        case Elementary::cos_fn: return cos(a);
        case Elementary::exp_fn: return exp(a);
        case Elementary::log_fn: return log(a);
        case Elementary::sqrt_fn: return sqrt(a);
        case Elementary::tan_fn: return tan(a);
        case Elementary::tanh_fn: return tanh(a);
      }
      throw_invalid("unreachable elementary");
    }
  }
  throw_invalid("unreachable expression op");
}

} // namespace

Scalar eval(const Expr& e, const Env& env) {
  if (!e) throw_invalid("null expression");
  return eval_node(*e, env);
}

struct BoundExpr::Node {
  ExprOp op;
  double value = 0.0;
  int slot = -1;
  Elementary fn = Elementary::sin_fn;
  std::shared_ptr<const Node> a, b;
};

namespace {

std::shared_ptr<const BoundExpr::Node> bind_node(const Expr& e,
                                                 const std::vector<std::string>& names);

} // namespace

BoundExpr::BoundExpr(const Expr& e, const std::vector<std::string>& names) : src_(e) {
  if (!e) throw_invalid("null expression");
  root_ = bind_node(e, names);
}

namespace {

std::shared_ptr<const BoundExpr::Node> bind_node(const Expr& e,
                                                 const std::vector<std::string>& names) {
  auto n = std::make_shared<BoundExpr::Node>();
  n->op = e->op;
  n->value = e->value;
  n->fn = e->fn;
  if (e->op == ExprOp::variable) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == e->name) {
        n->slot = static_cast<int>(i);
        return n;
      }
    }
    throw_config("unknown variable '" + e->name + "'");
  }
  if (e->op == ExprOp::constant) n->value = e->value;
  if (e->a) n->a = bind_node(e->a, names);
  if (e->b) n->b = bind_node(e->b, names);
  return n;
}

Scalar eval_bound(const BoundExpr::Node& n, std::span<const Scalar> slots) {
  switch (n.op) {
    case ExprOp::number:
    case ExprOp::constant: return Scalar(n.value);
    case ExprOp::variable: return slots[static_cast<std::size_t>(n.slot)];
    case ExprOp::neg: return -eval_bound(*n.a, slots);
    case ExprOp::add: return eval_bound(*n.a, slots) + eval_bound(*n.b, slots);
    case ExprOp::sub: return eval_bound(*n.a, slots) - eval_bound(*n.b, slots);
    case ExprOp::mul: return eval_bound(*n.a, slots) * eval_bound(*n.b, slots);
    case ExprOp::div: return eval_bound(*n.a, slots) / eval_bound(*n.b, slots);
    case ExprOp::pow: return pow(eval_bound(*n.a, slots), eval_bound(*n.b, slots));
    case ExprOp::call: {
      Scalar a = eval_bound(*n.a, slots);
      switch (n.fn) {
        case Elementary::sin_fn: return sin(a);
        case Elementary::cos_fn: return cos(a);
        case Elementary::exp_fn: return exp(a);
        case Elementary::log_fn: return log(a);
        case Elementary::sqrt_fn: return sqrt(a);
        case Elementary::tan_fn: return tan(a);
        case Elementary::tanh_fn: return tanh(a);
      }
      throw_invalid("unreachable elementary");
    }
  }
  throw_invalid("unreachable expression op");
}

} // namespace

Scalar BoundExpr::eval(std::span<const Scalar> slots) const {
  if (!root_) throw_invalid("evaluating an empty BoundExpr");
  return eval_bound(*root_, slots);
}

} // namespace liejet
