#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "liejet/error.hpp"
#include "liejet/variational.hpp"

using namespace liejet;

namespace {

JetVals rand_jet(const LieAlgebroid& A, int order, Rng& rng) {
  return sample_jet(A.n(), A.m(), order, rng, -1.0, 1.0);
}

double fn_at(const FnPtr& f, const LieAlgebroid& A, const JetVals& P) {
  return eval_at(f, A, P).as_double();
}

AlgebroidPtr so3() { return make_lie_algebra(3, so3_constants(), "so3"); }

AlgebroidPtr heisenberg() { return make_lie_algebra(3, heisenberg_constants(), "heisenberg"); }

AlgebroidPtr heavy_top_algebroid() {
  return make_action(3, 3, so3_constants(),
                     {{"0", "-x3", "x2"}, {"x3", "0", "-x1"}, {"-x2", "x1", "0"}});
}

AlgebroidPtr frame_algebroid() {
  return make_quasi_velocity(2, {{"1", "0"}, {"0", "exp(x1)"}}, {{1, 0, 1, expr_number(1.0)}});
}

std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Expr rand_coeff_expr(const LieAlgebroid& A, int order, Rng& rng) {
  std::vector<std::string> vars;
  for (int s = 0; s < jet_slot_count(A.n(), A.m(), order); ++s)
    vars.push_back(jet_slot_name(A.n(), A.m(), s));
  Expr e = expr_number(rng.uniform(-1.0, 1.0));
  for (int t = 0; t < 2 && !vars.empty(); ++t) {
    Expr v = expr_variable(vars[std::size_t(rng.next_below(int(vars.size())))]);
    Expr f;
    switch (rng.next_below(3)) {
      case 0: f = v; break;
      case 1: f = expr_call(Elementary::sin_fn, v); break;
      default:
        f = expr_binary(ExprOp::mul, v,
                        expr_variable(vars[std::size_t(rng.next_below(int(vars.size())))]));
    }
    e = expr_binary(ExprOp::add, e,
                    expr_binary(ExprOp::mul, expr_number(rng.uniform(-1.0, 1.0)), f));
  }
  return e;
}

/// Quadratic in the top velocity block plus a random lower-order part.
Lagrangian rand_lagrangian(const AlgebroidPtr& A, int k, Rng& rng) {
  std::string quad;
  for (int a = 0; a < A->m(); ++a) {
    if (a) quad += "+";
    quad += "0.5*y" + std::to_string(a + 1) + "_" + std::to_string(k) + "^2";
  }
  Expr e = expr_binary(ExprOp::add, parse_expr(quad), rand_coeff_expr(*A, k, rng));
  return Lagrangian(A, k, e, "random");
}

OneForm rand_form(const LieAlgebroid& A, int degree, Rng& rng) {
  OneForm f(A, degree);
  for (int r = 0; r <= degree; ++r)
    for (int a = 0; a < A.m(); ++a)
      f.set_coeff(r, a, fn_expression(A.n(), A.m(), rand_coeff_expr(A, degree, rng)));
  return f;
}

std::vector<Expr> rand_section(const LieAlgebroid& A, Rng& rng) {
  std::vector<Expr> eta;
  for (int a = 0; a < A.m(); ++a) {
    Expr e = expr_number(rng.uniform(-1.0, 1.0));
    for (int i = 0; i < A.n(); ++i)
      e = expr_binary(
          ExprOp::add, e,
          expr_binary(ExprOp::mul, expr_number(rng.uniform(-1.0, 1.0)),
                      expr_call(Elementary::sin_fn, expr_variable("x" + std::to_string(i + 1)))));
    eta.push_back(e);
  }
  return eta;
}

FnPtr pair_el_with_section(const Lagrangian& L, const std::vector<Expr>& eta) {
  const LieAlgebroid& A = L.algebroid();
  const std::vector<FnPtr>& el = el_functions(L);
  std::vector<FnPtr> terms;
  for (int a = 0; a < A.m(); ++a)
    terms.push_back(fn_mul(el[std::size_t(a)], fn_expression(A.n(), A.m(), eta[std::size_t(a)])));
  return fn_sum(std::move(terms), std::vector<double>(terms.size(), 1.0));
}

/// sigma(t) = eta(gamma(t)) for the curve through P, as a Taylor sampler
/// centred at the jet's own time origin.
SectionAlongCurve restrict_section(const AlgebroidPtr& A, const std::vector<Expr>& eta,
                                   const JetVals& P) {
  return SectionAlongCurve::from_sampler(A->m(), [A, eta, P](double, int degree) {
    const JetVals curve = jet_curve(*A, P, 0, degree);
    Env env;
    for (int i = 0; i < A->n(); ++i) env["x" + std::to_string(i + 1)] = curve.x(i);
    std::vector<std::vector<double>> rows;
    for (const Expr& comp : eta) {
      const Scalar v = eval(comp, env);
      std::vector<double> row(std::size_t(degree) + 1, 0.0);
      for (int j = 0; j <= degree; ++j) row[std::size_t(j)] = v.coeff(j).as_double();
      rows.push_back(std::move(row));
    }
    return rows;
  });
}

} // namespace

TEST_CASE("momenta descend from the top gradient by the recursion") {
  Rng rng(21);

  // k = 2 on the line: L = y_2^2/2 gives p^1 = y_2, p^0 = -y_3
  const auto T1 = make_tangent(1);
  const Lagrangian spline(T1, 2, parse_expr("0.5*y1_2^2"), "spline");
  const MomentaFamily& fam = momenta(spline);
  CHECK(fam.k == 2);
  CHECK(fam.p.size() == 2);
  CHECK(fam.eval_order(1) == 2);
  CHECK(fam.eval_order(0) == 3);
  for (int trial = 0; trial < 5; ++trial) {
    const JetVals P = rand_jet(*T1, 3, rng);
    CHECK(fn_at(fam.p[1][0], *T1, P) == doctest::Approx(P.y(2, 0).as_double()));
    CHECK(fn_at(fam.pi(0), *T1, P) == doctest::Approx(-P.y(3, 0).as_double()));
  }

  // k = 1 rigid body: pi_alpha = I_alpha y^alpha_1
  const auto A = so3();
  const Lagrangian body(A, 1, parse_expr("0.5*y1_1^2+y2_1^2+1.5*y3_1^2"), "rigid_body");
  const MomentaFamily& bf = momenta(body);
  CHECK(bf.p.size() == 1);
  const std::array<double, 3> I{1.0, 2.0, 3.0};
  for (int trial = 0; trial < 5; ++trial) {
    const JetVals P = rand_jet(*A, 1, rng);
    for (int a = 0; a < 3; ++a)
      CHECK(fn_at(bf.pi(a), *A, P) ==
            doctest::Approx(I[std::size_t(a)] * P.y(1, a).as_double()));
  }

  // the cache is built once and shared by copies
  CHECK(&momenta(spline) == &fam);
  const Lagrangian copy = spline;
  CHECK(&momenta(copy) == &fam);
}

TEST_CASE("momenta match the alternating total-derivative sums") {
  std::uint64_t seed = 300;
  for (const AlgebroidPtr& A : {so3(), make_tangent(2), frame_algebroid()})
    for (int k : {2, 3}) {
      Rng rng(seed++);
      const Lagrangian L = rand_lagrangian(A, k, rng);
      const MomentaFamily& fam = momenta(L);
      const int n = A->n(), m = A->m();
      // p^r_alpha = sum_{j=r}^{k-1} (-1)^{j-r} d_T^{j-r}( dL/dy^alpha_{j+1} )
      for (int r = 0; r < k; ++r)
        for (int alpha = 0; alpha < m; ++alpha) {
          std::vector<FnPtr> terms;
          std::vector<double> weights;
          for (int j = r; j < k; ++j) {
            terms.push_back(fn_total_derivative(
                fn_partial(L.fn(), jet_y_slot(n, m, j + 1, alpha)), j - r));
            weights.push_back((j - r) % 2 == 0 ? 1.0 : -1.0);
          }
          const FnPtr alt = fn_sum(std::move(terms), std::move(weights));
          for (int trial = 0; trial < 10; ++trial) {
            const JetVals P = rand_jet(*A, 2 * k - 1, rng);
            CHECK(fn_at(fam.p[std::size_t(r)][std::size_t(alpha)], *A, P) ==
                  doctest::Approx(fn_at(alt, *A, P)).epsilon(1e-9));
          }
        }
    }
}

TEST_CASE("Euler-Lagrange covector: lines, splines and the Euler equations") {
  Rng rng(33);

  // free particle: deltaL_alpha = -y^alpha_2
  const auto T2 = make_tangent(2);
  const Lagrangian free2(T2, 1, parse_expr("0.5*y1_1^2+0.5*y2_1^2"), "free_particle");
  for (int trial = 0; trial < 5; ++trial) {
    const JetVals P = rand_jet(*T2, 2, rng);
    const std::vector<double> r = el_residual(free2, P);
    CHECK(r[0] == doctest::Approx(-P.y(2, 0).as_double()));
    CHECK(r[1] == doctest::Approx(-P.y(2, 1).as_double()));
  }

  // cubic splines: deltaL = y_4, zero exactly on vanishing fourth derivative
  const auto T1 = make_tangent(1);
  const Lagrangian spline(T1, 2, parse_expr("0.5*y1_2^2"), "spline");
  JetVals S(1, 1, 4, std::vector<double>{0.3, 0.7, -0.2, 0.9, 1.0});
  CHECK(el_residual(spline, S)[0] == doctest::Approx(1.0));
  for (int trial = 0; trial < 5; ++trial) {
    const JetVals P = rand_jet(*T1, 4, rng);
    CHECK(el_residual(spline, P)[0] == doctest::Approx(P.y(4, 0).as_double()));
  }

  // rigid body: deltaL_gamma = -I_gamma ydot^gamma + (I y x y)_gamma
  const auto A = so3();
  const Lagrangian body(A, 1, parse_expr("0.5*y1_1^2+y2_1^2+1.5*y3_1^2"), "rigid_body");
  const std::array<double, 3> I{1.0, 2.0, 3.0};
  for (int trial = 0; trial < 8; ++trial) {
    const JetVals P = rand_jet(*A, 2, rng);
    const std::array<double, 3> w{P.y(1, 0).as_double(), P.y(1, 1).as_double(),
                                  P.y(1, 2).as_double()};
    const std::array<double, 3> iw{I[0] * w[0], I[1] * w[1], I[2] * w[2]};
    const std::array<double, 3> c = cross(iw, w);
    const std::vector<double> r = el_residual(body, P);
    for (int g = 0; g < 3; ++g)
      CHECK(r[std::size_t(g)] ==
            doctest::Approx(-I[std::size_t(g)] * P.y(2, g).as_double() + c[std::size_t(g)])
                .epsilon(1e-12));
  }

  // a jet satisfying Euler's equations I wdot = (I w) x w has zero residual
  JetVals E(0, 3, 2);
  const std::array<double, 3> w{0.4, -0.8, 0.3};
  const std::array<double, 3> c = cross({I[0] * w[0], I[1] * w[1], I[2] * w[2]}, w);
  for (int a = 0; a < 3; ++a) {
    E.y(1, a) = Scalar(w[std::size_t(a)]);
    E.y(2, a) = Scalar(c[std::size_t(a)] / I[std::size_t(a)]);
  }
  for (double r : el_residual(body, E)) CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("coordinate and integration-by-parts Euler-Lagrange paths agree") {
  std::uint64_t seed = 900;
  for (const AlgebroidPtr& A :
       {make_tangent(2), so3(), heisenberg(), heavy_top_algebroid(), frame_algebroid()})
    for (int k : {1, 2}) {
      Rng rng(seed++);
      for (int draw = 0; draw < 3; ++draw) {
        const Lagrangian L = rand_lagrangian(A, k, rng);
        double worst = 0.0;
        for (int trial = 0; trial < 34; ++trial) {
          const JetVals P = rand_jet(*A, 2 * k, rng);
          const std::vector<double> a = el_residual(L, P);
          const std::vector<double> b = el_residual_by_parts(L, P);
          for (int alpha = 0; alpha < A->m(); ++alpha)
            worst = std::max(worst, std::abs(a[std::size_t(alpha)] - b[std::size_t(alpha)]));
        }
        CHECK_MESSAGE(worst < 1e-9, A->name() << " k=" << k << " two-path gap " << worst);
      }
    }
}

TEST_CASE("Cartan form holds the momenta and equals the Cartan operator on dL") {
  Rng rng(55);

  // k = 1: theta_L = pi_alpha X^alpha only
  const auto A = so3();
  const Lagrangian body(A, 1, parse_expr("0.5*y1_1^2+y2_1^2+1.5*y3_1^2"), "rigid_body");
  const OneForm theta1 = cartan_form(body);
  CHECK(theta1.degree() == 1);
  const std::array<double, 3> I{1.0, 2.0, 3.0};
  for (int trial = 0; trial < 4; ++trial) {
    const JetVals P = rand_jet(*A, 1, rng);
    for (int a = 0; a < 3; ++a) {
      CHECK(fn_at(theta1.coeff(0, a), *A, P) ==
            doctest::Approx(I[std::size_t(a)] * P.y(1, a).as_double()));
      CHECK(fn_at(theta1.coeff(1, a), *A, P) == 0.0);
    }
  }

  // cubic splines: theta_L = -y_3 X + y_2 V_1, top half zero
  const auto T1 = make_tangent(1);
  const Lagrangian spline(T1, 2, parse_expr("0.5*y1_2^2"), "spline");
  const OneForm theta2 = cartan_form(spline);
  CHECK(theta2.degree() == 3);
  for (int trial = 0; trial < 4; ++trial) {
    const JetVals P = rand_jet(*T1, 3, rng);
    CHECK(fn_at(theta2.coeff(0, 0), *T1, P) == doctest::Approx(-P.y(3, 0).as_double()));
    CHECK(fn_at(theta2.coeff(1, 0), *T1, P) == doctest::Approx(P.y(2, 0).as_double()));
    CHECK(fn_at(theta2.coeff(2, 0), *T1, P) == 0.0);
    CHECK(fn_at(theta2.coeff(3, 0), *T1, P) == 0.0);
  }

  // agreement with the integration-by-parts operator at 50 samples
  std::uint64_t seed = 71;
  const std::vector<std::pair<AlgebroidPtr, int>> systems = {
      {so3(), 2}, {frame_algebroid(), 2}, {heavy_top_algebroid(), 1}, {make_tangent(2), 3}};
  for (const auto& [S, k] : systems) {
    Rng r2(seed++);
    const Lagrangian L = rand_lagrangian(S, k, r2);
    const OneForm diff =
        form_sub(cartan_form(L), cartan_operator(differential_of_function(*S, L.fn(), k)));
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial)
      worst = std::max(worst, form_max_abs(diff, rand_jet(*S, 2 * k - 1, r2)));
    CHECK_MESSAGE(worst < 1e-9, S->name() << " k=" << k << " Cartan gap " << worst);
  }
}

TEST_CASE("complete lift coefficients follow the bracket recursion") {
  Rng rng(77);

  // constant section on an abelian algebroid lifts with zero verticals
  const auto T2 = make_tangent(2);
  const JetVals P = rand_jet(*T2, 3, rng);
  const std::vector<double> flat =
      complete_lift_coeffs(*T2, {expr_number(0.4), expr_number(-1.1)}, P);
  CHECK(flat.size() == 8);
  CHECK(flat[0] == doctest::Approx(0.4));
  CHECK(flat[1] == doctest::Approx(-1.1));
  for (std::size_t i = 2; i < flat.size(); ++i) CHECK(flat[i] == 0.0);

  // eta = e_1 on so(3): v_1 = [y, e_1] and v_2 its shifted level
  const auto A = so3();
  const std::vector<Expr> e1 = {expr_number(1.0), expr_number(0.0), expr_number(0.0)};
  const JetVals Q = rand_jet(*A, 2, rng);
  const std::vector<double> lift = complete_lift_coeffs(*A, e1, Q);
  CHECK(lift.size() == 9);
  CHECK(lift[3] == doctest::Approx(0.0));
  CHECK(lift[4] == doctest::Approx(Q.y(1, 2).as_double()));
  CHECK(lift[5] == doctest::Approx(-Q.y(1, 1).as_double()));
  CHECK(lift[6] == doctest::Approx(0.0));
  CHECK(lift[7] == doctest::Approx(Q.y(2, 2).as_double()));
  CHECK(lift[8] == doctest::Approx(-Q.y(2, 1).as_double()));

  CHECK_THROWS_AS(complete_lift(*A, e1, -1), Error);
  CHECK_THROWS_AS(complete_lift(*A, {expr_number(1.0)}, 1), Error);
  CHECK_THROWS_AS(complete_lift(*T2, {parse_expr("y1_1"), expr_number(0.0)}, 1), Error);
}

TEST_CASE("variational field reduces to plain derivatives on tangent bundles") {
  const auto T2 = make_tangent(2);
  Rng rng(91);
  const JetVals P = rand_jet(*T2, 3, rng);
  const SectionAlongCurve sig = SectionAlongCurve::from_strings({"sin(t)", "t^3"});
  const double t = 0.4;
  const std::vector<double> v = variational_field(*T2, P, sig, t);
  CHECK(v.size() == 8);
  CHECK(v[0] == doctest::Approx(std::sin(t)));
  CHECK(v[1] == doctest::Approx(t * t * t));
  CHECK(v[2] == doctest::Approx(std::cos(t)));
  CHECK(v[3] == doctest::Approx(3 * t * t));
  CHECK(v[4] == doctest::Approx(-std::sin(t)));
  CHECK(v[5] == doctest::Approx(6 * t));
  CHECK(v[6] == doctest::Approx(-std::cos(t)));
  CHECK(v[7] == doctest::Approx(6.0));
}

TEST_CASE("variational field brackets the curve velocity on a Lie algebra") {
  const auto A = so3();
  // constant curve a(t) = xi
  const std::array<double, 3> xi{0.3, -0.2, 0.5};
  JetVals P(0, 3, 2);
  for (int a = 0; a < 3; ++a) P.y(1, a) = Scalar(xi[std::size_t(a)]);
  const SectionAlongCurve sig = SectionAlongCurve::from_strings({"t", "0", "0"});

  // sigma(t) = t e_1: bracket(t) = e_1 + t [xi, e_1], so v_1 = e_1 and
  // v_2 = [xi, e_1] = (0, xi_3, -xi_2)
  const std::vector<double> v0 = variational_field(*A, P, sig, 0.0);
  CHECK(v0.size() == 6);
  CHECK(v0[0] == doctest::Approx(1.0));
  CHECK(v0[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v0[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v0[3] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v0[4] == doctest::Approx(xi[2]));
  CHECK(v0[5] == doctest::Approx(-xi[1]));

  // at t = 1 the bracket term has accumulated into v_1
  const std::vector<double> v1 = variational_field(*A, P, sig, 1.0);
  CHECK(v1[0] == doctest::Approx(1.0));
  CHECK(v1[1] == doctest::Approx(xi[2]));
  CHECK(v1[2] == doctest::Approx(-xi[1]));
  CHECK(v1[4] == doctest::Approx(xi[2]));
  CHECK(v1[5] == doctest::Approx(-xi[1]));
}

TEST_CASE("restricting a section to a curve reproduces its complete lift") {
  std::uint64_t seed = 131;
  for (const AlgebroidPtr& A : {heavy_top_algebroid(), frame_algebroid(), so3()}) {
    Rng rng(seed++);
    const int k = 3;
    const JetVals P = rand_jet(*A, k, rng);
    const std::vector<Expr> eta = rand_section(*A, rng);
    const std::vector<double> vf =
        variational_field(*A, P, restrict_section(A, eta, P), 0.0);
    const std::vector<double> lift = complete_lift_coeffs(*A, eta, P);
    const int n = A->n(), m = A->m();
    // base components: w^i = rho^i_alpha eta^alpha at the base point
    std::vector<Scalar> base(P.slots().begin(), P.slots().begin() + n);
    for (int i = 0; i < n; ++i) {
      double w = 0.0;
      for (int a = 0; a < m; ++a)
        w += A->rho_at(i, a, base).as_double() * lift[std::size_t(a)];
      CHECK(vf[std::size_t(i)] == doctest::Approx(w).epsilon(1e-8));
    }
    for (int r = 1; r <= k; ++r)
      for (int a = 0; a < m; ++a)
        CHECK_MESSAGE(std::abs(vf[std::size_t(n + (r - 1) * m + a)] -
                               lift[std::size_t(m + (r - 1) * m + a)]) < 1e-8,
                      A->name() << " level " << r << " component " << a);
  }
}

TEST_CASE("variational fields of different orders project onto each other") {
  const auto A = frame_algebroid();
  Rng rng(141);
  const JetVals P3 = rand_jet(*A, 3, rng);
  const SectionAlongCurve sig = SectionAlongCurve::from_strings({"sin(t)+0.2", "t^2-t"});
  const double t = 0.3;
  const std::vector<double> full = variational_field(*A, P3, sig, t);
  const std::vector<double> entries = P3.to_doubles();
  const int n = A->n(), m = A->m();
  for (int l = 1; l < 3; ++l) {
    const JetVals Pl(n, m, l,
                     std::vector<double>(entries.begin(), entries.begin() + n + l * m));
    const std::vector<double> part = variational_field(*A, Pl, sig, t);
    REQUIRE(int(part.size()) == n + l * m);
    for (std::size_t i = 0; i < part.size(); ++i)
      CHECK(part[i] == doctest::Approx(full[i]).epsilon(1e-12));
  }
}

TEST_CASE("Noether integrals: translations, rotations and a boundary term") {
  Rng rng(151);

  // free particle, translation symmetry: G = -y^1_1
  const auto T2 = make_tangent(2);
  const Lagrangian free2(T2, 1, parse_expr("0.5*y1_1^2+0.5*y2_1^2"), "free_particle");
  const std::vector<Expr> e1 = {expr_number(1.0), expr_number(0.0)};
  const NoetherResult tr = noether_integral(free2, e1, nullptr);
  CHECK(tr.symmetry_ok);
  CHECK(tr.symmetry_residual < 1e-12);
  for (int trial = 0; trial < 5; ++trial) {
    const JetVals P = rand_jet(*T2, 1, rng);
    CHECK(fn_at(tr.integral, *T2, P) == doctest::Approx(-P.y(1, 0).as_double()));
  }

  // cubic splines: G = -pi_1 = y_3
  const auto T1 = make_tangent(1);
  const Lagrangian spline(T1, 2, parse_expr("0.5*y1_2^2"), "spline");
  const NoetherResult sp = noether_integral(spline, {expr_number(1.0)}, nullptr);
  CHECK(sp.symmetry_ok);
  for (int trial = 0; trial < 5; ++trial) {
    const JetVals P = rand_jet(*T1, 3, rng);
    CHECK(fn_at(sp.integral, *T1, P) == doctest::Approx(P.y(3, 0).as_double()));
  }

  // planar rotation: G = x2 y^1_1 - x1 y^2_1, the signed angular momentum
  const std::vector<Expr> rot = {parse_expr("-x2"), parse_expr("x1")};
  const NoetherResult am = noether_integral(free2, rot, nullptr);
  CHECK(am.symmetry_ok);
  for (int trial = 0; trial < 5; ++trial) {
    const JetVals P = rand_jet(*T2, 1, rng);
    CHECK(fn_at(am.integral, *T2, P) ==
          doctest::Approx(P.x(1).as_double() * P.y(1, 0).as_double() -
                          P.x(0).as_double() * P.y(1, 1).as_double()));
  }

  // symmetric top: e_1 generates a symmetry exactly when I_2 = I_3
  const auto A = so3();
  const std::vector<Expr> se1 = {expr_number(1.0), expr_number(0.0), expr_number(0.0)};
  const Lagrangian sym(A, 1, parse_expr("1.5*y1_1^2+y2_1^2+y3_1^2"), "symmetric_top");
  const NoetherResult st = noether_integral(sym, se1, nullptr);
  CHECK(st.symmetry_ok);
  for (int trial = 0; trial < 5; ++trial) {
    const JetVals P = rand_jet(*A, 1, rng);
    CHECK(fn_at(st.integral, *A, P) == doctest::Approx(-3.0 * P.y(1, 0).as_double()));
  }

  // asymmetric top: the premise fails and the result says so
  const Lagrangian asym(A, 1, parse_expr("0.5*y1_1^2+y2_1^2+1.5*y3_1^2"), "rigid_body");
  const NoetherResult bad = noether_integral(asym, se1, nullptr);
  CHECK_FALSE(bad.symmetry_ok);
  CHECK(bad.symmetry_residual > 0.05);
  CHECK(bad.integral); // the candidate is still produced, flagged as unverified

  // magnetic coupling: d_{eta} L = d_T F with F = -x2
  const Lagrangian mag(T2, 1, parse_expr("0.5*y1_1^2+0.5*y2_1^2+x2*y1_1-x1*y2_1"), "coupled");
  const FnPtr F = fn_expression(2, 2, parse_expr("-x2"));
  const NoetherResult bt = noether_integral(mag, e1, F);
  CHECK(bt.symmetry_ok);
  CHECK(bt.symmetry_residual < 1e-12);
  for (int trial = 0; trial < 5; ++trial) {
    const JetVals P = rand_jet(*T2, 1, rng);
    CHECK(fn_at(bt.integral, *T2, P) ==
          doctest::Approx(-P.y(1, 0).as_double() - 2.0 * P.x(1).as_double()));
  }

  // F must live one order below the Lagrangian and on the same jet space
  CHECK_THROWS_AS(noether_integral(free2, e1, fn_y(2, 2, 1, 0)), Error);
  CHECK_THROWS_AS(noether_integral(free2, e1, fn_x(1, 1, 0)), Error);
}

TEST_CASE("along solutions the Noether integral differentiates to the residual pairing") {
  // d_T G = <deltaL, eta> whenever the symmetry premise holds
  Rng rng(161);
  const auto T2 = make_tangent(2);
  const auto A = so3();

  struct Case {
    Lagrangian L;
    std::vector<Expr> eta;
    FnPtr F;
  };
  const std::vector<Case> cases = {
      {Lagrangian(T2, 1, parse_expr("0.5*y1_1^2+0.5*y2_1^2"), "free"),
       {expr_number(1.0), expr_number(0.0)},
       nullptr},
      {Lagrangian(T2, 1, parse_expr("0.5*y1_1^2+0.5*y2_1^2"), "free"),
       {parse_expr("-x2"), parse_expr("x1")},
       nullptr},
      {Lagrangian(make_tangent(1), 2, parse_expr("0.5*y1_2^2"), "spline"),
       {expr_number(1.0)},
       nullptr},
      {Lagrangian(A, 1, parse_expr("1.5*y1_1^2+y2_1^2+y3_1^2"), "symmetric_top"),
       {expr_number(1.0), expr_number(0.0), expr_number(0.0)},
       nullptr},
      {Lagrangian(T2, 1, parse_expr("0.5*y1_1^2+0.5*y2_1^2+x2*y1_1-x1*y2_1"), "coupled"),
       {expr_number(1.0), expr_number(0.0)},
       fn_expression(2, 2, parse_expr("-x2"))},
  };
  for (const Case& c : cases) {
    const NoetherResult res = noether_integral(c.L, c.eta, c.F);
    REQUIRE(res.symmetry_ok);
    const FnPtr lhs = fn_total_derivative(res.integral);
    const FnPtr rhs = pair_el_with_section(c.L, c.eta);
    const int order = std::max(lhs->order, rhs->order);
    for (int trial = 0; trial < 20; ++trial) {
      const JetVals P = rand_jet(c.L.algebroid(), order, rng);
      CHECK(std::abs(fn_at(lhs, c.L.algebroid(), P) - fn_at(rhs, c.L.algebroid(), P)) < 1e-9);
    }
  }
}

TEST_CASE("the lift derivative splits into residual and boundary parts") {
  // d_{eta^k} L = <deltaL, eta> + d_T <theta_L, eta^{2k-1}> for any L and eta
  std::uint64_t seed = 171;
  const std::vector<std::pair<AlgebroidPtr, int>> systems = {
      {so3(), 2}, {frame_algebroid(), 2}, {heavy_top_algebroid(), 1}};
  for (const auto& [A, k] : systems) {
    Rng rng(seed++);
    const Lagrangian L = rand_lagrangian(A, k, rng);
    const std::vector<Expr> eta = rand_section(*A, rng);
    const FnPtr lhs = lift_derivative(*A, L.fn(), k, eta);
    const FnPtr rhs =
        fn_add(pair_el_with_section(L, eta),
               fn_total_derivative(pair_with_complete_lift(cartan_form(L), eta)));
    double worst = 0.0;
    for (int trial = 0; trial < 15; ++trial) {
      const JetVals P = rand_jet(*A, 2 * k, rng);
      worst = std::max(worst, std::abs(fn_at(lhs, *A, P) - fn_at(rhs, *A, P)));
    }
    CHECK_MESSAGE(worst < 1e-9, A->name() << " k=" << k << " split gap " << worst);
  }
}

TEST_CASE("pairing with complete lifts commutes with the total derivative") {
  // <d_T lambda, eta^{k+1}> = d_T <lambda, eta^k>
  std::uint64_t seed = 181;
  for (const AlgebroidPtr& A : {so3(), frame_algebroid(), heavy_top_algebroid()})
    for (int k : {1, 2}) {
      Rng rng(seed++);
      const OneForm lam = rand_form(*A, k, rng);
      const std::vector<Expr> eta = rand_section(*A, rng);
      const FnPtr lhs = pair_with_complete_lift(form_dT(lam), eta);
      const FnPtr rhs = fn_total_derivative(pair_with_complete_lift(lam, eta));
      const int order = std::max(lhs->order, rhs->order);
      double worst = 0.0;
      for (int trial = 0; trial < 15; ++trial) {
        const JetVals P = rand_jet(*A, order, rng);
        worst = std::max(worst, std::abs(fn_at(lhs, *A, P) - fn_at(rhs, *A, P)));
      }
      CHECK_MESSAGE(worst < 1e-9, A->name() << " k=" << k << " pairing gap " << worst);
    }
}

TEST_CASE("sections along curves evaluate values and Taylor expansions") {
  const SectionAlongCurve sig = SectionAlongCurve::from_strings({"sin(t)", "t^2"});
  CHECK(sig.m() == 2);
  const double t = 0.5;
  const std::vector<double> v = sig.values(t);
  CHECK(v[0] == doctest::Approx(std::sin(t)));
  CHECK(v[1] == doctest::Approx(t * t));

  const std::vector<Scalar> T = sig.taylor(t, 3);
  CHECK(T[0].coeff(0).as_double() == doctest::Approx(std::sin(t)));
  CHECK(T[0].coeff(1).as_double() == doctest::Approx(std::cos(t)));
  CHECK(T[0].coeff(2).as_double() == doctest::Approx(-std::sin(t) / 2));
  CHECK(T[0].coeff(3).as_double() == doctest::Approx(-std::cos(t) / 6));
  CHECK(T[1].coeff(0).as_double() == doctest::Approx(t * t));
  CHECK(T[1].coeff(1).as_double() == doctest::Approx(2 * t));
  CHECK(T[1].coeff(2).as_double() == doctest::Approx(1.0));
  CHECK(T[1].coeff(3).as_double() == doctest::Approx(0.0));

  // constant components share the Taylor shape
  const SectionAlongCurve c = SectionAlongCurve::from_strings({"0.7", "t"});
  const std::vector<Scalar> Tc = c.taylor(0.0, 2);
  CHECK(Tc[0].is_taylor());
  CHECK(Tc[0].coeff(0).as_double() == doctest::Approx(0.7));
  CHECK(Tc[0].coeff(1).as_double() == doctest::Approx(0.0));

  // sampler round-trip
  const SectionAlongCurve s = SectionAlongCurve::from_sampler(
      1, [](double, int degree) {
        return std::vector<std::vector<double>>{
            std::vector<double>(std::size_t(degree) + 1, 2.0)};
      });
  CHECK(s.values(0.3)[0] == doctest::Approx(2.0));
  CHECK(s.taylor(0.3, 2)[0].coeff(2).as_double() == doctest::Approx(2.0));

  CHECK_THROWS_AS(SectionAlongCurve::from_strings({"x1"}), Error);
  CHECK_THROWS_AS(SectionAlongCurve::from_strings({}), Error);
  CHECK_THROWS_AS(SectionAlongCurve::from_sampler(0, nullptr), Error);
  CHECK_THROWS_AS(sig.taylor(0.0, 0), Error);
  const SectionAlongCurve wrong = SectionAlongCurve::from_sampler(
      2, [](double, int) { return std::vector<std::vector<double>>{}; });
  CHECK_THROWS_AS(wrong.taylor(0.0, 1), Error);
}

TEST_CASE("Lagrangian construction validates its coordinates") {
  const auto T1 = make_tangent(1);
  CHECK_THROWS_AS(Lagrangian(T1, 1, parse_expr("y1_2^2")), Error);   // level above k
  CHECK_THROWS_AS(Lagrangian(T1, 1, parse_expr("z1+y1_1")), Error);  // unknown name
  CHECK_THROWS_AS(Lagrangian(T1, 0, parse_expr("0.5")), Error);
  CHECK_THROWS_AS(Lagrangian(nullptr, 1, parse_expr("0.5")), Error);
  CHECK_THROWS_AS(Lagrangian(T1, 1, nullptr), Error);

  const Lagrangian L(T1, 2, parse_expr("0.5*y1_1^2"), "low_order");
  CHECK(L.order() == 2);
  CHECK(L.label() == "low_order");
  CHECK(L.fn()->order == 1); // reading below the declared order is allowed
}
