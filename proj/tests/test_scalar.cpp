#include "liejet/scalar.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "liejet/error.hpp"
#include "liejet/rng.hpp"

using namespace liejet;

namespace {

std::vector<double> coeffs_of(const Scalar& s) {
  std::vector<double> out;
  for (const auto& c : s.taylor_coeffs()) out.push_back(c.as_double());
  return out;
}

void check_coeffs(const Scalar& s, const std::vector<double>& want, double tol = 1e-14) {
  auto got = coeffs_of(s);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(tol));
}

} // namespace

TEST_CASE("taylor recurrences match the elementary series") {
  const Scalar t0 = Scalar::taylor_variable(0.0, 3);
  check_coeffs(exp(t0), {1.0, 1.0, 0.5, 1.0 / 6.0});
  check_coeffs(sin(t0), {0.0, 1.0, 0.0, -1.0 / 6.0});
  check_coeffs(cos(t0), {1.0, 0.0, -0.5, 0.0});
  check_coeffs(tan(t0), {0.0, 1.0, 0.0, 1.0 / 3.0});
  check_coeffs(tanh(t0), {0.0, 1.0, 0.0, -1.0 / 3.0});

  const Scalar t1 = Scalar::taylor_variable(1.0, 2);
  check_coeffs(sqrt(t1), {1.0, 0.5, -0.125});
  check_coeffs(log(Scalar::taylor_variable(1.0, 3)), {0.0, 1.0, -0.5, 1.0 / 3.0});
}

TEST_CASE("taylor products, quotients and powers") {
  const Scalar t = Scalar::taylor_variable(1.0, 2); // 1 + t
  check_coeffs(t * t, {1.0, 2.0, 1.0});

  const Scalar u = Scalar::taylor_variable(1.0, 3);
  check_coeffs(Scalar(1.0) / (Scalar(2.0) - u), {1.0, 1.0, 1.0, 1.0}); // 1/(1-t)
  check_coeffs(pow(u, Scalar(3.0)), {1.0, 3.0, 3.0, 1.0});
  check_coeffs(pow(u, Scalar(-1.0)), {1.0, -1.0, 1.0, -1.0});
  // fractional exponent goes through exp(b log a)
  check_coeffs(pow(u, Scalar(0.5)), {1.0, 0.5, -0.125, 1.0 / 16.0});

  CHECK(pow(Scalar(2.0), Scalar(10.0)).as_double() == doctest::Approx(1024.0));
  CHECK(pow(Scalar(3.0), Scalar(2.5)).as_double() == doctest::Approx(std::pow(3.0, 2.5)));
}

TEST_CASE("mixing rules") {
  const Scalar t = Scalar::taylor_variable(2.0, 2);
  check_coeffs(t + 3.0, {5.0, 1.0, 0.0});
  check_coeffs(3.0 * t, {6.0, 3.0, 0.0});

  const Scalar other_degree = Scalar::taylor_variable(0.0, 3);
  CHECK_THROWS_AS((void)(t + other_degree), Error);
  try {
    (void)(t * other_degree);
    FAIL("expected a shape error");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::shape);
  }

  // a perturbation scalar promotes the other operand with zero delta
  const Scalar d = Scalar::dual(Scalar(2.0), Scalar(1.0));
  const Scalar p = d * Scalar(5.0);
  CHECK(p.dual_value().as_double() == doctest::Approx(10.0));
  CHECK(p.dual_delta().as_double() == doctest::Approx(5.0));
}

TEST_CASE("perturbation scalars differentiate") {
  // f(x) = x^2 at x = 3
  const Scalar x = Scalar::dual(Scalar(3.0), Scalar(1.0));
  const Scalar f = x * x;
  CHECK(f.dual_value().as_double() == doctest::Approx(9.0));
  CHECK(f.dual_delta().as_double() == doctest::Approx(6.0));

  const double d1 = perturb_derivative(
      [](std::span<const Scalar> a) { return a[0] * a[0]; }, std::vector<double>{3.0}, 0);
  CHECK(d1 == doctest::Approx(6.0));
  const double d2 = perturb_derivative(
      [](std::span<const Scalar> a) { return a[0] * a[1]; }, std::vector<double>{2.0, 5.0}, 1);
  CHECK(d2 == doctest::Approx(2.0));
}

TEST_CASE("perturbation derivative agrees with finite differences") {
  auto f = [](std::span<const Scalar> a) {
    return sin(a[0]) * exp(a[1]) + a[0] / (a[1] + 3.0);
  };
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const double ax = rng.uniform(-1.0, 1.0);
    const double ay = rng.uniform(-1.0, 1.0);
    for (int idx = 0; idx < 2; ++idx) {
      const double exact = perturb_derivative(f, std::vector<double>{ax, ay}, idx);
      const double h = 1e-6;
      std::vector<double> lo{ax, ay}, hi{ax, ay};
      lo[std::size_t(idx)] -= h;
      hi[std::size_t(idx)] += h;
      std::vector<Scalar> slo(lo.begin(), lo.end()), shi(hi.begin(), hi.end());
      const double fd = (f(shi).as_double() - f(slo).as_double()) / (2.0 * h);
      CHECK(exact == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("taylor derivative tower agrees with analytic derivatives") {
  // g(t) = exp(sin t); normalized coefficient r of the expansion at t0 is
  // g^(r)(t0)/r!.
  const double t0 = 0.3;
  const Scalar g = exp(sin(Scalar::taylor_variable(t0, 3)));
  const double c = std::cos(t0), s = std::sin(t0);
  const double g0 = std::exp(s);
  const double g1 = c * g0;
  const double g2 = (c * c - s) * g0;
  const double g3 = c * (c * c - 3.0 * s - 1.0) * g0;
  check_coeffs(g, {g0, g1, g2 / 2.0, g3 / 6.0}, 1e-12);
}

TEST_CASE("nested shapes") {
  // Taylor coefficients that are themselves Taylor scalars: the expansion of
  // f(s, t) = (s + t)^2 in s with t symbolic.
  const Scalar t = Scalar::taylor_variable(0.5, 2);
  const Scalar s = Scalar::taylor({t, Scalar(1.0), Scalar(0.0)}); // s(u) = t + u
  const Scalar f = s * s;
  CHECK(f.coeff(0).is_taylor());
  check_coeffs(f.coeff(0), {0.25, 1.0, 1.0}); // t^2
  check_coeffs(f.coeff(1), {1.0, 2.0, 0.0});  // 2t
  CHECK(f.coeff(2).coeff(0).as_double() == doctest::Approx(1.0));

  // coefficient extraction maps through perturbation scalars componentwise
  const Scalar mixed = Scalar::dual(Scalar::taylor_variable(2.0, 2), Scalar::taylor_constant(1.0, 2));
  const Scalar c1 = mixed.coeff(1);
  CHECK(c1.is_dual());
  CHECK(c1.dual_value().as_double() == doctest::Approx(1.0));
  CHECK(c1.dual_delta().as_double() == doctest::Approx(0.0));

  // delta extraction maps through Taylor layers
  const Scalar seeded = Scalar::taylor(
      {Scalar::dual(Scalar(1.0), Scalar(3.0)), Scalar::dual(Scalar(2.0), Scalar(4.0))});
  const Scalar delta = delta_component(seeded);
  check_coeffs(delta, {3.0, 4.0});
  CHECK(delta_component(Scalar(7.0)).as_double() == doctest::Approx(0.0));
}

TEST_CASE("zero_like and one_like preserve shape") {
  const Scalar t = Scalar::taylor_variable(2.0, 3);
  check_coeffs(t.zero_like(), {0.0, 0.0, 0.0, 0.0});
  check_coeffs(t.one_like(), {1.0, 0.0, 0.0, 0.0});

  const Scalar d = Scalar::dual(t, t.zero_like());
  const Scalar one = d.one_like();
  CHECK(one.is_dual());
  check_coeffs(one.dual_value(), {1.0, 0.0, 0.0, 0.0});
  check_coeffs(one.dual_delta(), {0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("domain errors carry the domain kind") {
  auto expect_domain = [](auto&& thunk) {
    try {
      (void)thunk();
      FAIL("expected a domain error");
    } catch (const Error& e) {
      CHECK(e.kind() == Error::Kind::domain);
    }
  };
  expect_domain([] { return log(Scalar(-1.0)); });
  expect_domain([] { return sqrt(Scalar::taylor_variable(-2.0, 2)); });
  expect_domain([] { return Scalar(1.0) / Scalar::taylor_constant(0.0, 2); });
  expect_domain([] { return log(Scalar::taylor_variable(0.0, 2)); });
}
