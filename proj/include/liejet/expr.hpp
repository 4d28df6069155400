#ifndef LIEJET_EXPR_HPP
#define LIEJET_EXPR_HPP

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "liejet/scalar.hpp"

namespace liejet {

/// AST for the scalar expression language.
///
/// Grammar (EBNF), loosest binding first:
///   expr    = term { ("+" | "-") term } ;
///   term    = unary { ("*" | "/") unary } ;
///   unary   = "-" unary | power ;
///   power   = atom [ "^" unary ] ;            (* right associative *)
///   atom    = number | "pi" | name | name "(" expr ")" | "(" expr ")" ;
///   name    = letter { letter | digit | "_" } ;
///
/// Functions: sin cos exp log sqrt tan tanh. "pi" is a reserved constant.
/// Every other name is a free variable resolved by the evaluation
/// environment; the engine binds x1..xn and y<alpha>_<r>.
///
/// A unary minus directly on a number literal folds into the literal, so
/// trees built with negative literals reparse identically.
struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

enum class ExprOp {
  number,   // literal
  constant, // named constant (pi)
  variable,
  neg,
  add,
  sub,
  mul,
  div,
  pow,
  call // elementary function application
};

struct ExprNode {
  ExprOp op;
  double value = 0.0;          // number
  std::string name;            // variable / constant / function name
  Elementary fn = Elementary::sin_fn;
  Expr a, b;                   // operands
};

Expr expr_number(double v);
Expr expr_variable(const std::string& name);
Expr expr_unary(ExprOp op, Expr a);
Expr expr_binary(ExprOp op, Expr a, Expr b);
Expr expr_call(Elementary fn, Expr a);
Expr expr_pi();

/// Parses source text; throws Error(kind=parse) with a byte offset on
/// lexical or syntax errors.
Expr parse_expr(const std::string& src);

/// Minimal-parenthesis rendering. parse(pretty_print(parse(s))) is
/// structurally identical to parse(s).
std::string pretty_print(const Expr& e);

bool expr_equal(const Expr& a, const Expr& b);

std::set<std::string> free_variables(const Expr& e);

/// Replaces variables by expressions; variables absent from the map stay.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

/// Symbolic partial derivative in one variable, with zero/one folding so the
/// result stays compact. a^b with a non-constant exponent differentiates
/// through exp(b log a) and inherits its positivity domain.
Expr differentiate(const Expr& e, const std::string& var);

/// Name -> value environment; all dynamic bindings of one evaluation are
/// expected to share one scalar shape, constants broadcast.
using Env = std::map<std::string, Scalar>;

/// Evaluates with a by-name environment; unknown variables are an error.
Scalar eval(const Expr& e, const Env& env);

/// Expression compiled against a fixed slot layout for fast repeated
/// evaluation: variables are resolved to indices once.
class BoundExpr {
public:
  BoundExpr() = default;
  /// names[i] is the variable bound to slot i; unknown variables throw
  /// Error(kind=config) naming the offender.
  BoundExpr(const Expr& e, const std::vector<std::string>& names);

  Scalar eval(std::span<const Scalar> slots) const;
  bool valid() const { return static_cast<bool>(root_); }
  const Expr& source() const { return src_; }

  struct Node; // resolved tree, opaque outside the implementation

private:
  std::shared_ptr<const Node> root_;
  Expr src_;
};

} // namespace liejet

#endif
