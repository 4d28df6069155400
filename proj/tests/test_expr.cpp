#include "liejet/expr.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "liejet/error.hpp"
#include "liejet/rng.hpp"

using namespace liejet;

namespace {

double eval_num(const std::string& src, const Env& env = {}) {
  return eval(parse_expr(src), env).as_double();
}

} // namespace

TEST_CASE("precedence and associativity") {
  CHECK(eval_num("1+2*3^2") == doctest::Approx(19.0));
  CHECK(eval_num("2^3^2") == doctest::Approx(512.0)); // right-assoc
  CHECK(eval_num("-2^2") == doctest::Approx(-4.0));   // unary binds below ^
  CHECK(eval_num("2^-2") == doctest::Approx(0.25));   // signed exponent
  CHECK(eval_num("6/2/3") == doctest::Approx(1.0));   // left-assoc
  CHECK(eval_num("6-2-3") == doctest::Approx(1.0));
  CHECK(eval_num("(1+2)*3") == doctest::Approx(9.0));
  CHECK(eval_num("--3") == doctest::Approx(3.0));
  CHECK(eval_num("2*pi") == doctest::Approx(2.0 * M_PI));
  CHECK(eval_num("sin(pi/2)") == doctest::Approx(1.0));
  CHECK(eval_num("exp(log(5))") == doctest::Approx(5.0));
}

TEST_CASE("parse errors carry byte offsets") {
  auto expect_parse = [](const std::string& src) {
    try {
      (void)parse_expr(src);
      FAIL("expected a parse error for: " << src);
      return Error(Error::Kind::parse, "");
    } catch (const Error& e) {
      CHECK(e.kind() == Error::Kind::parse);
      CHECK(e.offset() != Error::npos);
      return e;
    }
  };
  const Error unb = expect_parse("(1+2");
  CHECK(unb.offset() == 0); // points at the unmatched opener
  expect_parse("1+*2");
  expect_parse("sin 3");
  expect_parse("1 2");
  expect_parse("");
  expect_parse("2^");
  expect_parse("foo(3)"); // unknown function name
  expect_parse("1..5");
}

TEST_CASE("round-trip printing is structurally stable") {
  const std::vector<std::string> tricky = {
      "1+2*3",       "(1+2)*3",     "-x1",          "-(x1+y1_1)",  "2^-2",
      "-2^2",        "(-2)^2",      "x1^(2+1)",     "a/(b*c)",     "a/b*c",
      "a-(b-c)",     "a-b-c",       "sin(x1)^2",    "-sin(x1)",    "2^(3^2)",
      "(2^3)^2",     "x1*-3",       "1/(1+exp(-x1))", "sqrt(x1^2+y1_1^2)",
  };
  for (const auto& src : tricky) {
    const Expr e = parse_expr(src);
    const std::string printed = pretty_print(e);
    CAPTURE(src);
    CAPTURE(printed);
    CHECK(expr_equal(parse_expr(printed), e));
  }
}

namespace {

Expr random_expr(Rng& rng, int depth) {
  const std::vector<std::string> vars = {"x1", "x2", "y1_1", "y2_1", "y1_2"};
  if (depth <= 0 || rng.next_below(5) == 0) {
    switch (rng.next_below(3)) {
      case 0: return expr_number(std::floor(rng.uniform(-50.0, 50.0)) / 4.0);
      case 1: return expr_variable(vars[std::size_t(rng.next_below(int(vars.size())))]);
      default: return expr_pi();
    }
  }
  switch (rng.next_below(7)) {
    case 0: return expr_binary(ExprOp::add, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 1: return expr_binary(ExprOp::sub, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 2: return expr_binary(ExprOp::mul, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 3: return expr_binary(ExprOp::div, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 4: return expr_binary(ExprOp::pow, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 5: return expr_unary(ExprOp::neg, random_expr(rng, depth - 1));
    default: {
      const Elementary fns[] = {Elementary::sin_fn, Elementary::cos_fn, Elementary::exp_fn,
                                Elementary::log_fn, Elementary::sqrt_fn, Elementary::tan_fn,
                                Elementary::tanh_fn};
      return expr_call(fns[rng.next_below(7)], random_expr(rng, depth - 1));
    }
  }
}

} // namespace

TEST_CASE("round-trip printing survives random trees") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Expr e = random_expr(rng, 5);
    const std::string printed = pretty_print(e);
    CAPTURE(printed);
    const Expr back = parse_expr(printed);
    CHECK(expr_equal(back, e));
    // printing is idempotent
    CHECK(pretty_print(back) == printed);
  }
}

TEST_CASE("evaluation over scalar environments") {
  Env env;
  env["x1"] = Scalar::taylor_variable(1.0, 2);
  const Scalar out = eval(parse_expr("x1^2"), env);
  REQUIRE(out.is_taylor());
  CHECK(out.coeff(0).as_double() == doctest::Approx(1.0));
  CHECK(out.coeff(1).as_double() == doctest::Approx(2.0));
  CHECK(out.coeff(2).as_double() == doctest::Approx(1.0));

  try {
    (void)eval(parse_expr("nope+1"), env);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::config);
    CHECK(std::string(e.what()).find("nope") != std::string::npos);
  }
}

TEST_CASE("free variables and substitution") {
  const Expr e = parse_expr("sin(x1)*y2_3 + pi");
  const auto fv = free_variables(e);
  CHECK(fv == std::set<std::string>{"x1", "y2_3"});

  const Expr swapped = substitute(e, {{"y2_3", expr_variable("z")}});
  CHECK(free_variables(swapped) == std::set<std::string>{"x1", "z"});
}

TEST_CASE("bound expressions resolve slots once") {
  const Expr e = parse_expr("x1*y1_1 + 2");
  const BoundExpr b(e, {"x1", "y1_1"});
  std::vector<Scalar> slots = {Scalar(3.0), Scalar(4.0)};
  CHECK(b.eval(slots).as_double() == doctest::Approx(14.0));

  try {
    (void)BoundExpr(parse_expr("q+1"), {"x1"});
    FAIL("expected a config error");
  } catch (const Error& err) {
    CHECK(err.kind() == Error::Kind::config);
    CHECK(std::string(err.what()).find("q") != std::string::npos);
  }
}
