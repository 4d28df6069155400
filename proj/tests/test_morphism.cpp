#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "liejet/error.hpp"
#include "liejet/morphism.hpp"

using namespace liejet;

namespace {

JetVals rand_jet(const LieAlgebroid& A, int order, Rng& rng) {
  return sample_jet(A.n(), A.m(), order, rng, -1.0, 1.0);
}

double factorial(int r) {
  double f = 1.0;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

AlgebroidPtr so3() { return make_lie_algebra(3, so3_constants(), "so3"); }

AlgebroidPtr heis_algebra() { return make_lie_algebra(3, heisenberg_constants(), "heis"); }

/// Left-invariant frame on a global chart of the Heisenberg group:
/// rho columns (d/dx1, d/dx2 + x1 d/dx3, d/dx3), bracket [e1,e2] = e3.
AlgebroidPtr heis_tangent() {
  return make_quasi_velocity(3, {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "x1", "1"}},
                             {{2, 0, 1, expr_number(1.0)}}, "heis_frame");
}

AlgebroidPtr frame_algebroid() {
  return make_quasi_velocity(2, {{"1", "0"}, {"0", "exp(x1)"}}, {{1, 0, 1, expr_number(1.0)}});
}

/// Collapse of the invariant frame onto its Lie algebra: constant base,
/// identity fiber map.
Morphism heis_morphism() {
  return Morphism::from_strings(heis_tangent(), heis_algebra(), {},
                                {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}},
                                "heis_reduce");
}

/// Change of fiber basis from the quasi-velocity frame to coordinate
/// velocities; the fiber map is the frame matrix itself.
Morphism hamel_morphism() {
  return Morphism::from_strings(frame_algebroid(), make_tangent(2), {"x1", "x2"},
                                {{"1", "0"}, {"0", "exp(x1)"}}, "hamel");
}

/// Two-parameter family of rotations: columns are the body angular
/// velocities of the x1 and x2 motions.
Morphism rotor_morphism() {
  return Morphism::from_strings(make_tangent(2), so3(), {},
                                {{"0", "sin(x1)"}, {"0", "cos(x1)"}, {"1", "0"}}, "rotor");
}

/// Left trivialization of the coordinate tangent bundle over the Heisenberg
/// chart: the fiber map is the inverse frame matrix.
Morphism trivialize_morphism() {
  return Morphism::from_strings(make_tangent(3), heis_tangent(), {"x1", "x2", "x3"},
                                {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "-x1", "1"}},
                                "trivialize");
}

JetVals truncate_jet(const JetVals& P, int l) {
  JetVals out(P.n(), P.m(), l);
  for (int s = 0; s < out.size(); ++s) out.at(s) = P.at(s);
  return out;
}

double max_slot_gap(const JetVals& A, const JetVals& B) {
  REQUIRE(A.size() == B.size());
  double worst = 0.0;
  for (int s = 0; s < A.size(); ++s)
    worst = std::max(worst, std::abs(A.at(s).as_double() - B.at(s).as_double()));
  return worst;
}

/// Random coefficient function on the target base (a constant for targets
/// over a point).
Expr rand_target_coeff(const LieAlgebroid& T, Rng& rng) {
  Expr e = expr_number(rng.uniform(-1.0, 1.0));
  for (int i = 0; i < T.n(); ++i)
    e = expr_binary(
        ExprOp::add, e,
        expr_binary(ExprOp::mul, expr_number(rng.uniform(-1.0, 1.0)),
                    expr_call(Elementary::sin_fn, expr_variable("x" + std::to_string(i + 1)))));
  return e;
}

/// Worst gap of d(pullback of theta') - pullback of d(theta') over basis
/// section pairs and random base points, for theta' a random 1-form on the
/// target algebroid. Zero for genuine morphisms.
double pullback_commutation_gap(const Morphism& M, Rng& rng, int samples) {
  const LieAlgebroid& S = M.source();
  const LieAlgebroid& T = M.target();
  const int n = S.n(), m = S.m(), np = T.n(), mp = T.m();

  std::vector<Expr> f(static_cast<std::size_t>(mp));
  for (int gp = 0; gp < mp; ++gp) f[std::size_t(gp)] = rand_target_coeff(T, rng);

  std::map<std::string, Expr> mid;
  for (int ip = 0; ip < np; ++ip) mid["x" + std::to_string(ip + 1)] = M.base_expr(ip);
  // g_a = f_{g'}(phi(x)) Phi^{g'}_a(x), the pulled-back coefficients
  std::vector<Expr> g(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    Expr acc = expr_number(0.0);
    for (int gp = 0; gp < mp; ++gp)
      acc = expr_binary(ExprOp::add, acc,
                        expr_binary(ExprOp::mul, substitute(f[std::size_t(gp)], mid),
                                    M.fiber_expr(gp, a)));
    g[std::size_t(a)] = acc;
  }

  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<Scalar> xs;
    Env env_s;
    for (int i = 0; i < n; ++i) {
      const double v = rng.uniform(-1.0, 1.0);
      xs.push_back(Scalar(v));
      env_s["x" + std::to_string(i + 1)] = Scalar(v);
    }
    const std::vector<Scalar> xps = M.base_at(xs);
    const std::vector<std::vector<Scalar>> Ph = M.fiber_at(xs);
    Env env_t;
    for (int ip = 0; ip < np; ++ip) env_t["x" + std::to_string(ip + 1)] = xps[std::size_t(ip)];

    const auto dg = [&](int a, int j) {
      return eval(differentiate(g[std::size_t(a)], "x" + std::to_string(j + 1)), env_s)
          .as_double();
    };
    const auto df = [&](int gp, int jp) {
      return eval(differentiate(f[std::size_t(gp)], "x" + std::to_string(jp + 1)), env_t)
          .as_double();
    };
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        double lhs = 0.0;
        for (int j = 0; j < n; ++j)
          lhs += S.rho_at(j, a, xs).as_double() * dg(b, j) -
                 S.rho_at(j, b, xs).as_double() * dg(a, j);
        for (int gm = 0; gm < m; ++gm)
          lhs -= eval(g[std::size_t(gm)], env_s).as_double() * S.c_at(gm, a, b, xs).as_double();

        double rhs = 0.0;
        for (int ap = 0; ap < mp; ++ap)
          for (int bp = 0; bp < mp; ++bp) {
            double two = 0.0;
            for (int jp = 0; jp < np; ++jp)
              two += T.rho_at(jp, ap, xps).as_double() * df(bp, jp) -
                     T.rho_at(jp, bp, xps).as_double() * df(ap, jp);
            for (int gp = 0; gp < mp; ++gp)
              two -= eval(f[std::size_t(gp)], env_t).as_double() *
                     T.c_at(gp, ap, bp, xps).as_double();
            if (ap < bp)  // the 2-form value is antisymmetric; sum each pair once
              rhs += two * (Ph[std::size_t(ap)][std::size_t(a)].as_double() *
                                Ph[std::size_t(bp)][std::size_t(b)].as_double() -
                            Ph[std::size_t(ap)][std::size_t(b)].as_double() *
                                Ph[std::size_t(bp)][std::size_t(a)].as_double());
          }
        worst = std::max(worst, std::abs(lhs - rhs));
      }
  }
  return worst;
}

}  // namespace

TEST_CASE("morphism construction validates its data") {
  auto S = frame_algebroid();
  auto T = make_tangent(2);
  CHECK_THROWS_AS(Morphism::from_strings(nullptr, T, {"x1", "x2"}, {{"1", "0"}, {"0", "1"}}),
                  Error);
  // base map arity must match the target base
  CHECK_THROWS_AS(Morphism::from_strings(S, T, {"x1"}, {{"1", "0"}, {"0", "1"}}), Error);
  // fiber map must be m' x m
  CHECK_THROWS_AS(Morphism::from_strings(S, T, {"x1", "x2"}, {{"1", "0"}}), Error);
  CHECK_THROWS_AS(Morphism::from_strings(S, T, {"x1", "x2"}, {{"1"}, {"0"}}), Error);
  // entries read source base coordinates only
  CHECK_THROWS_AS(Morphism::from_strings(S, T, {"x1", "y1_1"}, {{"1", "0"}, {"0", "1"}}), Error);
  CHECK_THROWS_AS(Morphism::from_strings(S, T, {"x1", "x2"}, {{"x5", "0"}, {"0", "1"}}), Error);

  const Morphism id = Morphism::identity(S);
  CHECK(id.source().n() == 2);
  CHECK(pretty_print(id.base_expr(0)) == "x1");
  CHECK(pretty_print(id.fiber_expr(1, 1)) == "1");
  CHECK(pretty_print(id.fiber_expr(0, 1)) == "0");
}

TEST_CASE("identity morphisms pass with zero residuals") {
  for (const auto& A : {so3(), frame_algebroid(), heis_tangent()}) {
    const StructureReport rep = check_morphism(Morphism::identity(A));
    CHECK(rep.passed);
    CHECK(rep.residual("anchor compatibility") == 0.0);
    CHECK(rep.residual("bracket compatibility") == 0.0);
  }
}

TEST_CASE("hand-built morphisms satisfy both compatibility conditions") {
  for (const Morphism& M :
       {heis_morphism(), hamel_morphism(), rotor_morphism(), trivialize_morphism()}) {
    const StructureReport rep = check_morphism(M);
    INFO(M.label());
    CHECK(rep.passed);
    CHECK(rep.residual("anchor compatibility") <= 1e-12);
    CHECK(rep.residual("bracket compatibility") <= 1e-12);
  }
}

TEST_CASE("breaking a morphism trips exactly the violated condition") {
  // scaling one generator of so(3) breaks the bracket, never the (empty) anchor
  const Morphism scaled = Morphism::from_strings(
      so3(), so3(), {}, {{"2", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}}, "scaled");
  const StructureReport rep = check_morphism(scaled);
  CHECK_FALSE(rep.passed);
  CHECK(rep.residual("anchor compatibility") == 0.0);
  CHECK(rep.residual("bracket compatibility") == doctest::Approx(1.0));

  // scaling the base map breaks the anchor, and the flat target keeps the
  // bracket condition untouched
  const Morphism stretched =
      Morphism::from_strings(frame_algebroid(), make_tangent(2), {"x1", "2*x2"},
                             {{"1", "0"}, {"0", "exp(x1)"}}, "stretched");
  const StructureReport rep2 = check_morphism(stretched);
  CHECK_FALSE(rep2.passed);
  CHECK(rep2.residual("anchor compatibility") > 0.1);
  CHECK(rep2.residual("bracket compatibility") <= 1e-12);
}

TEST_CASE("plane variation families are morphisms exactly when the variation equations hold") {
  // alpha = (x1, x2, x1^2 x2), beta = (0, x1, 0) solve
  //   d(alpha)/dx2 = d(beta)/dx1 + [alpha, beta]
  // in the Heisenberg algebra, so the matrix with columns (alpha, beta) is a
  // morphism from the tangent plane
  const Morphism good = Morphism::from_strings(
      make_tangent(2), heis_algebra(), {}, {{"x1", "0"}, {"x2", "x1"}, {"x1^2*x2", "0"}},
      "variation_family");
  const StructureReport rep = check_morphism(good);
  CHECK(rep.passed);
  CHECK(rep.residual("bracket compatibility") <= 1e-14);

  // perturbing the third component breaks the same equation by d(x2^2)/dx2
  const Morphism bad = Morphism::from_strings(
      make_tangent(2), heis_algebra(), {}, {{"x1", "0"}, {"x2", "x1"}, {"x1^2*x2+x2^2", "0"}},
      "tampered_family");
  const StructureReport rep2 = check_morphism(bad);
  CHECK_FALSE(rep2.passed);
  CHECK(rep2.residual("anchor compatibility") == 0.0);
  CHECK(rep2.residual("bracket compatibility") > 0.5);
}

TEST_CASE("pullback of differentials commutes on random 1-forms") {
  Rng rng(2024);
  for (const Morphism& M :
       {hamel_morphism(), rotor_morphism(), heis_morphism(), trivialize_morphism()}) {
    INFO(M.label());
    CHECK(pullback_commutation_gap(M, rng, 20) <= 1e-9);
  }
}

TEST_CASE("jet pushforward maps prolongation curves") {
  Rng rng(7);

  // identity leaves every slot fixed
  const auto F = frame_algebroid();
  const JetVals P = rand_jet(*F, 3, rng);
  CHECK(max_slot_gap(push_jet(Morphism::identity(F), P), P) <= 1e-15);

  // constant fiber map over a point target drops x and keeps the y blocks
  const Morphism H = heis_morphism();
  const JetVals Q = rand_jet(H.source(), 3, rng);
  const JetVals Qp = push_jet(H, Q);
  CHECK(Qp.n() == 0);
  CHECK(Qp.k() == 3);
  for (int r = 1; r <= 3; ++r)
    for (int a = 0; a < 3; ++a)
      CHECK(Qp.y(r, a).as_double() == doctest::Approx(Q.y(r, a).as_double()).epsilon(1e-14));

  // order-0 jets push by the base map alone
  const Morphism Ha = hamel_morphism();
  JetVals base(2, 2, 0);
  base.x(0) = 0.4;
  base.x(1) = -0.7;
  const JetVals pushed = push_jet(Ha, base);
  CHECK(pushed.k() == 0);
  CHECK(pushed.x(0).as_double() == 0.4);
  CHECK(pushed.x(1).as_double() == -0.7);

  CHECK_THROWS_AS(push_jet(Ha, rand_jet(*so3(), 2, rng)), Error);
}

TEST_CASE("jet pushforward commutes with truncation") {
  Rng rng(11);
  for (const Morphism& M : {hamel_morphism(), rotor_morphism(), heis_morphism()}) {
    INFO(M.label());
    for (int rep = 0; rep < 5; ++rep) {
      const JetVals P = rand_jet(M.source(), 4, rng);
      const JetVals full = push_jet(M, P);
      for (int l = 1; l <= 3; ++l)
        CHECK(max_slot_gap(push_jet(M, truncate_jet(P, l)), truncate_jet(full, l)) <= 1e-12);
    }
  }
}

TEST_CASE("kinetic energy on the Heisenberg algebra pulls back to an invariant Lagrangian") {
  const Morphism M = heis_morphism();
  const Lagrangian Lt(heis_algebra(), 1, parse_expr("0.5*(y1^2+y2^2+y3^2)"), "heis_kinetic");
  const Lagrangian L = reduce_lagrangian(M, Lt);
  CHECK(L.algebroid().n() == 3);
  CHECK(L.order() == 1);

  Rng rng(21);
  for (int c = 0; c < 20; ++c) {
    JetVals P = rand_jet(M.source(), 1, rng);
    double want = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double v = P.y(1, a).as_double();
      want += 0.5 * v * v;
    }
    CHECK(eval_at(L.fn(), M.source(), P).as_double() == doctest::Approx(want).epsilon(1e-12));
    // no x dependence through the composed Lagrangian
    P.x(0) = 2.5;
    P.x(2) = -1.75;
    CHECK(eval_at(L.fn(), M.source(), P).as_double() == doctest::Approx(want).epsilon(1e-12));
  }

  const std::vector<double> s0{0.1, -0.2, 0.3, 0.5, -0.4, 0.2};
  const ReductionComparison cmp = compare_reduction(M, Lt, s0, 0.0, 5.0, 1e-3);
  CHECK(cmp.source.size() == cmp.target.size());
  CHECK(cmp.pushed.method == "pushforward");
  CHECK(cmp.max_gap <= 1e-6);
}

TEST_CASE("second-order Heisenberg reduction agrees along trajectories") {
  const Morphism M = heis_morphism();
  const Lagrangian Lt(heis_algebra(), 2, parse_expr("0.5*(y1_2^2+y2_2^2+y3_2^2)"),
                      "heis_accel");
  const Lagrangian L = reduce_lagrangian(M, Lt);

  Rng rng(22);
  for (int c = 0; c < 10; ++c) {
    const JetVals P = rand_jet(M.source(), 2, rng);
    double want = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double v = P.y(2, a).as_double();
      want += 0.5 * v * v;
    }
    CHECK(eval_at(L.fn(), M.source(), P).as_double() == doctest::Approx(want).epsilon(1e-12));
  }

  const std::vector<double> s0{0.1, 0.2,  -0.3, 0.4,  -0.2, 0.3,
                               0.1, 0.3,  -0.2, -0.3, 0.1,  0.2};
  const ReductionComparison cmp = compare_reduction(M, Lt, s0, 0.0, 1.0, 1e-3);
  CHECK(cmp.max_gap <= 1e-6);
}

TEST_CASE("reduction through the identity reproduces the trajectories") {
  const auto A = so3();
  const Lagrangian Lt(A, 1, parse_expr("0.5*y1_1^2+y2_1^2+1.5*y3_1^2"), "rigid_body");
  const ReductionComparison cmp =
      compare_reduction(Morphism::identity(A), Lt, std::vector<double>{2.0, 0.1, -0.3}, 0.0, 2.0,
                        1e-3);
  CHECK(cmp.max_gap <= 1e-13);
}

TEST_CASE("two-stage reduction equals reduction by the composed morphism") {
  const Morphism M1 = trivialize_morphism();
  const Morphism M2 = heis_morphism();
  const Morphism M = compose(M2, M1);
  CHECK(M.source().n() == 3);
  CHECK(M.target().n() == 0);
  CHECK(check_morphism(M).passed);

  const Lagrangian Lpp(heis_algebra(), 1, parse_expr("0.5*(y1^2+y2^2+y3^2)"), "heis_kinetic");
  const Lagrangian staged = reduce_lagrangian(M1, reduce_lagrangian(M2, Lpp));
  const Lagrangian direct = reduce_lagrangian(M, Lpp);

  // closed form of the left-invariant kinetic energy in coordinate velocities
  const Lagrangian closed(make_tangent(3), 1,
                          parse_expr("0.5*(y1_1^2+y2_1^2+(y3_1-x1*y2_1)^2)"), "closed");
  Rng rng(31);
  for (int c = 0; c < 25; ++c) {
    const JetVals P = rand_jet(M.source(), 1, rng);
    const double a = eval_at(staged.fn(), M.source(), P).as_double();
    const double b = eval_at(direct.fn(), M.source(), P).as_double();
    const double d = eval_at(closed.fn(), M.source(), P).as_double();
    CHECK(a == doctest::Approx(d).epsilon(1e-12));
    CHECK(b == doctest::Approx(d).epsilon(1e-12));
  }

  // the two pullbacks integrate to the same motion
  const std::vector<double> s0{0.2, -0.1, 0.3, 0.5, 0.4, -0.3};
  const AssembledODE ode_a = assemble_ode(staged);
  const AssembledODE ode_b = assemble_ode(direct);
  const Trajectory ta = integrate(ode_a, s0, 0.0, 2.0, 1e-3);
  const Trajectory tb = integrate(ode_b, s0, 0.0, 2.0, 1e-3);
  double gap = 0.0;
  for (std::size_t i = 0; i < ta.states.size(); ++i)
    for (std::size_t c = 0; c < ta.states[i].size(); ++c)
      gap = std::max(gap, std::abs(ta.states[i][c] - tb.states[i][c]));
  CHECK(gap <= 1e-9);

  // and the composed reduction reduces: pushed states follow the algebra flow
  const ReductionComparison cmp = compare_reduction(M, Lpp, s0, 0.0, 2.0, 1e-3);
  CHECK(cmp.max_gap <= 1e-6);

  // pushforward composes pointwise
  Rng rng2(32);
  for (int c = 0; c < 5; ++c) {
    const JetVals P = rand_jet(M.source(), 3, rng2);
    CHECK(max_slot_gap(push_jet(M, P), push_jet(M2, push_jet(M1, P))) <= 1e-12);
  }
}

TEST_CASE("Euler-Lagrange residuals of invariant pullbacks transform by the fiber map") {
  Rng rng(41);
  struct Case {
    Morphism M;
    Lagrangian Lt;
  };
  const std::vector<Case> cases = {
      {hamel_morphism(),
       Lagrangian(make_tangent(2), 1, parse_expr("0.5*(y1_1^2+exp(-2*x1)*y2_1^2)"), "hamel")},
      {rotor_morphism(), Lagrangian(so3(), 1, parse_expr("0.5*(y1^2+y2^2+y3^2)"), "rot_kinetic")},
      {rotor_morphism(),
       Lagrangian(so3(), 2, parse_expr("0.5*(y1_2^2+y2_2^2+y3_2^2)"), "rot_accel")},
  };
  for (const Case& c : cases) {
    INFO(c.Lt.label());
    const Lagrangian L = reduce_lagrangian(c.M, c.Lt);
    const int k = c.Lt.order();
    const int n = c.M.source().n(), m = c.M.source().m(), mp = c.M.target().m();
    for (int rep = 0; rep < 25; ++rep) {
      const JetVals P = rand_jet(c.M.source(), 2 * k, rng);
      const std::vector<double> up = el_residual(L, P);
      const std::vector<double> down = el_residual(c.Lt, push_jet(c.M, P));
      const auto Ph = c.M.fiber_at(P.slots().subspan(0, static_cast<std::size_t>(n)));
      for (int a = 0; a < m; ++a) {
        double want = 0.0;
        for (int ap = 0; ap < mp; ++ap)
          want += Ph[std::size_t(ap)][std::size_t(a)].as_double() * down[std::size_t(ap)];
        CHECK(std::abs(up[std::size_t(a)] - want) <= 1e-8);
      }
    }
  }

  // the second-order rotor pullback has a closed form
  const Lagrangian L2 = reduce_lagrangian(
      rotor_morphism(), Lagrangian(so3(), 2, parse_expr("0.5*(y1_2^2+y2_2^2+y3_2^2)"), "acc"));
  const Lagrangian want(make_tangent(2), 2,
                        parse_expr("0.5*(y1_2^2+y2_2^2+y1_1^2*y2_1^2)"), "closed");
  Rng rng2(42);
  for (int rep = 0; rep < 20; ++rep) {
    const JetVals P = rand_jet(L2.algebroid(), 2, rng2);
    CHECK(eval_at(L2.fn(), L2.algebroid(), P).as_double() ==
          doctest::Approx(eval_at(want.fn(), want.algebroid(), P).as_double()).epsilon(1e-12));
  }
}

TEST_CASE("reconstruction integrates the anchored fiber curve") {
  const auto A = heis_tangent();

  // a vanishing fiber curve keeps the base point fixed
  const Trajectory still = reconstruct(*A, SectionAlongCurve::from_strings({"0", "0", "0"}),
                                       std::vector<double>{0.3, -0.2, 0.5}, 0.0, 1.0, 0.1);
  for (const auto& row : still.states) {
    CHECK(row[0] == 0.3);
    CHECK(row[1] == -0.2);
    CHECK(row[2] == 0.5);
  }

  // constant first generator: straight line in x1
  const Trajectory line = reconstruct(*A, SectionAlongCurve::from_strings({"1", "0", "0"}),
                                      std::vector<double>{0.0, 0.0, 0.0}, 0.0, 1.0, 0.01);
  for (int i = 0; i < line.size(); ++i) {
    CHECK(std::abs(line.states[std::size_t(i)][0] - line.t[std::size_t(i)]) <= 1e-10);
    CHECK(line.states[std::size_t(i)][2] == 0.0);
  }

  // constant second generator from (c, 0, 0): x = (c, t, c t)
  const Trajectory drift = reconstruct(*A, SectionAlongCurve::from_strings({"0", "1", "0"}),
                                       std::vector<double>{0.7, 0.0, 0.0}, 0.0, 1.0, 0.01);
  for (int i = 0; i < drift.size(); ++i) {
    const double t = drift.t[std::size_t(i)];
    CHECK(drift.states[std::size_t(i)][0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(std::abs(drift.states[std::size_t(i)][1] - t) <= 1e-10);
    CHECK(std::abs(drift.states[std::size_t(i)][2] - 0.7 * t) <= 1e-10);
  }

  // time-dependent curve with a closed-form flow
  const SectionAlongCurve xi = SectionAlongCurve::from_strings({"sin(t)", "1", "0"});
  const Trajectory traj = reconstruct(*A, xi, std::vector<double>{0.0, 0.0, 0.0}, 0.0, 2.0, 1e-3);
  CHECK(traj.n == 3);
  CHECK(traj.m == 0);
  CHECK(traj.state_size() == 3);
  for (int i = 0; i < traj.size(); i += 100) {
    const double t = traj.t[std::size_t(i)];
    CHECK(std::abs(traj.states[std::size_t(i)][0] - (1.0 - std::cos(t))) <= 1e-8);
    CHECK(std::abs(traj.states[std::size_t(i)][1] - t) <= 1e-8);
    CHECK(std::abs(traj.states[std::size_t(i)][2] - (t - std::sin(t))) <= 1e-8);
  }

  // admissibility of the lifted curve: central difference of x against rho xi
  const int mid = 700;
  const double h = 1e-3;
  const double tm = traj.t[std::size_t(mid)];
  std::vector<Scalar> xm;
  for (double v : traj.states[std::size_t(mid)]) xm.push_back(Scalar(v));
  const std::vector<double> vm = xi.values(tm);
  for (int i = 0; i < 3; ++i) {
    const double fd = (traj.states[std::size_t(mid + 1)][std::size_t(i)] -
                       traj.states[std::size_t(mid - 1)][std::size_t(i)]) /
                      (2 * h);
    double want = 0.0;
    for (int a = 0; a < 3; ++a) want += A->rho_at(i, a, xm).as_double() * vm[std::size_t(a)];
    CHECK(std::abs(fd - want) <= 1e-5);
  }

  // lifting the reconstructed base curve and pushing recovers the fiber curve
  const Morphism M = heis_morphism();
  for (int i : {500, 1000, 1500}) {
    const double t = traj.t[std::size_t(i)];
    JetVals P(3, 3, 2);
    for (int j = 0; j < 3; ++j) P.x(j) = traj.states[std::size_t(i)][std::size_t(j)];
    const std::vector<Scalar> tay = xi.taylor(t, 1);
    for (int a = 0; a < 3; ++a)
      for (int r = 1; r <= 2; ++r)
        P.y(r, a) = factorial(r - 1) * tay[std::size_t(a)].coeff(r - 1).as_double();
    const JetVals Q = push_jet(M, P);
    CHECK(Q.y(1, 0).as_double() == doctest::Approx(std::sin(t)).epsilon(1e-9));
    CHECK(Q.y(1, 1).as_double() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(Q.y(2, 0).as_double() == doctest::Approx(std::cos(t)).epsilon(1e-9));
    CHECK(std::abs(Q.y(2, 2).as_double()) <= 1e-9);
  }

  CHECK_THROWS_AS(reconstruct(*A, SectionAlongCurve::from_strings({"0", "0"}),
                              std::vector<double>{0, 0, 0}, 0.0, 1.0, 0.1),
                  Error);
  CHECK_THROWS_AS(
      reconstruct(*A, xi, std::vector<double>{0, 0}, 0.0, 1.0, 0.1), Error);
  CHECK_THROWS_AS(
      reconstruct(*A, xi, std::vector<double>{0, 0, 0}, 0.0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(
      reconstruct(*A, xi, std::vector<double>{0, 0, 0}, 1.0, 1.0, 0.1), Error);
}

TEST_CASE("composition and reduction guard their shapes") {
  CHECK_THROWS_AS(compose(hamel_morphism(), heis_morphism()), Error);
  CHECK_THROWS_AS(
      reduce_lagrangian(hamel_morphism(),
                        Lagrangian(so3(), 1, parse_expr("0.5*y1_1^2"), "wrong_target")),
      Error);
}
