#include "liejet/scalar.hpp"

#include <cmath>
#include <sstream>

namespace liejet {

Scalar Scalar::taylor(std::vector<Scalar> coeffs) {
  if (coeffs.empty()) throw_shape("Taylor scalar needs at least the constant coefficient");
  Scalar s;
  s.v_ = TaylorRep{std::move(coeffs)};
  return s;
}

Scalar Scalar::taylor_constant(double value, int degree) {
  if (degree < 0) throw_shape("Taylor degree must be nonnegative");
  std::vector<Scalar> c(static_cast<std::size_t>(degree) + 1, Scalar(0.0));
  c[0] = Scalar(value);
  return taylor(std::move(c));
}

Scalar Scalar::taylor_variable(double value, int degree) {
  if (degree < 1) throw_shape("Taylor variable needs degree >= 1");
  std::vector<Scalar> c(static_cast<std::size_t>(degree) + 1, Scalar(0.0));
  c[0] = Scalar(value);
  c[1] = Scalar(1.0);
  return taylor(std::move(c));
}

Scalar Scalar::dual(Scalar value, Scalar delta) {
  Scalar s;
  s.v_ = DualRep{{std::move(value), std::move(delta)}};
  return s;
}

double Scalar::as_double() const {
  if (!is_double()) throw_shape("scalar is not a plain real: " + to_string());
  return std::get<double>(v_);
}

int Scalar::taylor_degree() const {
  return static_cast<int>(taylor_coeffs().size()) - 1;
}

const std::vector<Scalar>& Scalar::taylor_coeffs() const {
  if (!is_taylor()) throw_shape("scalar is not a Taylor scalar: " + to_string());
  return std::get<TaylorRep>(v_).c;
}

Scalar Scalar::coeff(int j) const {
  if (j < 0) throw_shape("negative Taylor coefficient index");
  if (is_taylor()) {
    const auto& c = taylor_coeffs();
    if (static_cast<std::size_t>(j) < c.size()) return c[static_cast<std::size_t>(j)];
    return c[0].zero_like();
  }
  // A perturbation scalar is extracted componentwise: the j-th coefficient
  // of v + eps*d is coeff_j(v) + eps*coeff_j(d).
  if (is_dual()) return dual(dual_value().coeff(j), dual_delta().coeff(j));
  if (j == 0) return *this;
  return zero_like();
}

const Scalar& Scalar::dual_value() const {
  if (!is_dual()) throw_shape("scalar is not a perturbation scalar: " + to_string());
  return std::get<DualRep>(v_).vd[0];
}
const Scalar& Scalar::dual_delta() const {
  if (!is_dual()) throw_shape("scalar is not a perturbation scalar: " + to_string());
  return std::get<DualRep>(v_).vd[1];
}

double Scalar::constant_part() const {
  if (is_double()) return std::get<double>(v_);
  if (is_taylor()) return taylor_coeffs()[0].constant_part();
  return dual_value().constant_part();
}

Scalar Scalar::zero_like() const {
  if (is_double()) return Scalar(0.0);
  if (is_taylor()) {
    const auto& c = taylor_coeffs();
    std::vector<Scalar> z;
    z.reserve(c.size());
    for (const auto& ci : c) z.push_back(ci.zero_like());
    return taylor(std::move(z));
  }
  return dual(dual_value().zero_like(), dual_delta().zero_like());
}

Scalar Scalar::one_like() const { return zero_like() + Scalar(1.0); }

std::string Scalar::to_string() const {
  std::ostringstream os;
  if (is_double()) {
    os << std::get<double>(v_);
  } else if (is_taylor()) {
    os << "taylor[";
    const auto& c = taylor_coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) os << ", ";
      os << c[i].to_string();
    }
    os << "]";
  } else {
    os << "dual(" << dual_value().to_string() << " ; " << dual_delta().to_string() << ")";
  }
  return os.str();
}

namespace {

void check_same_degree(const Scalar& a, const Scalar& b) {
  if (a.taylor_degree() != b.taylor_degree())
    throw_shape("mixed Taylor degrees: " + std::to_string(a.taylor_degree()) + " vs " +
                std::to_string(b.taylor_degree()));
}

} // namespace

Scalar operator+(const Scalar& a, const Scalar& b) {
  if (a.is_double() && b.is_double()) return Scalar(a.as_double() + b.as_double());
  if (a.is_dual() || b.is_dual()) {
    if (a.is_dual() && b.is_dual())
      return Scalar::dual(a.dual_value() + b.dual_value(), a.dual_delta() + b.dual_delta());
    if (a.is_dual()) return Scalar::dual(a.dual_value() + b, a.dual_delta());
    return Scalar::dual(a + b.dual_value(), b.dual_delta());
  }
  if (a.is_taylor() && b.is_taylor()) {
    check_same_degree(a, b);
    std::vector<Scalar> c;
    c.reserve(a.taylor_coeffs().size());
    for (std::size_t i = 0; i < a.taylor_coeffs().size(); ++i)
      c.push_back(a.taylor_coeffs()[i] + b.taylor_coeffs()[i]);
    return Scalar::taylor(std::move(c));
  }
  // exactly one side is Taylor, the other a double: broadcast into c[0]
  const Scalar& t = a.is_taylor() ? a : b;
  const Scalar& d = a.is_taylor() ? b : a;
  std::vector<Scalar> c = t.taylor_coeffs();
  c[0] = c[0] + d;
  return Scalar::taylor(std::move(c));
}

Scalar operator-(const Scalar& a) {
  if (a.is_double()) return Scalar(-a.as_double());
  if (a.is_dual()) return Scalar::dual(-a.dual_value(), -a.dual_delta());
  std::vector<Scalar> c;
  c.reserve(a.taylor_coeffs().size());
  for (const auto& ci : a.taylor_coeffs()) c.push_back(-ci);
  return Scalar::taylor(std::move(c));
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
  if (a.is_double() && b.is_double()) return Scalar(a.as_double() * b.as_double());
  if (a.is_dual() || b.is_dual()) {
    if (a.is_dual() && b.is_dual())
      return Scalar::dual(a.dual_value() * b.dual_value(),
                          a.dual_value() * b.dual_delta() + a.dual_delta() * b.dual_value());
    if (a.is_dual()) return Scalar::dual(a.dual_value() * b, a.dual_delta() * b);
    return Scalar::dual(a * b.dual_value(), a * b.dual_delta());
  }
  if (a.is_taylor() && b.is_taylor()) {
    check_same_degree(a, b);
    const auto& ac = a.taylor_coeffs();
    const auto& bc = b.taylor_coeffs();
    const std::size_t sz = ac.size();
    std::vector<Scalar> c(sz, Scalar(0.0));
    for (std::size_t s = 0; s < sz; ++s) {
      Scalar acc(0.0);
      for (std::size_t j = 0; j <= s; ++j) acc += ac[j] * bc[s - j];
      c[s] = acc;
    }
    return Scalar::taylor(std::move(c));
  }
  const Scalar& t = a.is_taylor() ? a : b;
  const Scalar& d = a.is_taylor() ? b : a;
  std::vector<Scalar> c;
  c.reserve(t.taylor_coeffs().size());
  for (const auto& ci : t.taylor_coeffs()) c.push_back(ci * d);
  return Scalar::taylor(std::move(c));
}

namespace {

/// Reciprocal of a scalar; requires a nonzero innermost constant term.
Scalar reciprocal(const Scalar& b) {
  if (b.constant_part() == 0.0)
    throw_domain("division by a scalar whose constant term is zero");
  if (b.is_double()) return Scalar(1.0 / b.as_double());
  if (b.is_dual()) {
    Scalar iv = reciprocal(b.dual_value());
    return Scalar::dual(iv, -(iv * b.dual_delta() * iv));
  }
  const auto& c = b.taylor_coeffs();
  const std::size_t sz = c.size();
  std::vector<Scalar> u(sz, Scalar(0.0));
  Scalar ic0 = reciprocal(c[0]);
  u[0] = ic0;
  for (std::size_t s = 1; s < sz; ++s) {
    Scalar acc(0.0);
    for (std::size_t j = 1; j <= s; ++j) acc += c[j] * u[s - j];
    u[s] = -(ic0 * acc);
  }
  return Scalar::taylor(std::move(u));
}

} // namespace

Scalar operator/(const Scalar& a, const Scalar& b) {
  if (a.is_double() && b.is_double()) {
    if (b.as_double() == 0.0) throw_domain("division by zero");
    return Scalar(a.as_double() / b.as_double());
  }
  return a * reciprocal(b);
}

namespace {

Scalar taylor_elem(Elementary f, const Scalar& a);

/// Derivative of an elementary function, expressed through elementaries.
Scalar elem_derivative(Elementary f, const Scalar& v) {
  switch (f) {
    case Elementary::sin_fn: return cos(v);
    case Elementary::cos_fn: return -sin(v);
    case Elementary::exp_fn: return exp(v);
    case Elementary::log_fn: return Scalar(1.0) / v;
    case Elementary::sqrt_fn: return Scalar(0.5) / sqrt(v);
    case Elementary::tan_fn: {
      Scalar t = tan(v);
      return Scalar(1.0) + t * t;
    }
    case Elementary::tanh_fn: {
      Scalar t = tanh(v);
      return Scalar(1.0) - t * t;
    }
  }
  throw_invalid("unreachable elementary");
}

double elem_double(Elementary f, double x) {
  switch (f) {
    case Elementary::sin_fn: return std::sin(x);
    case Elementary::cos_fn: return std::cos(x);
    case Elementary::exp_fn: return std::exp(x);
    case Elementary::log_fn:
      if (x <= 0.0) throw_domain("log of a nonpositive value");
      return std::log(x);
    case Elementary::sqrt_fn:
      if (x < 0.0) throw_domain("sqrt of a negative value");
      return std::sqrt(x);
    case Elementary::tan_fn: return std::tan(x);
    case Elementary::tanh_fn: return std::tanh(x);
  }
  throw_invalid("unreachable elementary");
}

/// exp/log/sqrt recurrences on normalized coefficients; sin/cos run jointly.
Scalar taylor_elem(Elementary f, const Scalar& a) {
  const auto& ac = a.taylor_coeffs();
  const std::size_t sz = ac.size();
  auto zero = [] { return Scalar(0.0); };

  switch (f) {
    case Elementary::exp_fn: {
      std::vector<Scalar> w(sz, Scalar(0.0));
      w[0] = exp(ac[0]);
      for (std::size_t s = 1; s < sz; ++s) {
        Scalar acc = zero();
        for (std::size_t j = 1; j <= s; ++j) acc += Scalar(double(j)) * ac[j] * w[s - j];
        w[s] = acc / Scalar(double(s));
      }
      return Scalar::taylor(std::move(w));
    }
    case Elementary::log_fn: {
      if (a.constant_part() <= 0.0) throw_domain("log of a scalar with nonpositive constant term");
      std::vector<Scalar> w(sz, Scalar(0.0));
      w[0] = log(ac[0]);
      for (std::size_t s = 1; s < sz; ++s) {
        Scalar acc = zero();
        for (std::size_t i = 1; i < s; ++i) acc += Scalar(double(s - i)) * ac[i] * w[s - i];
        w[s] = (ac[s] - acc / Scalar(double(s))) / ac[0];
      }
      return Scalar::taylor(std::move(w));
    }
    case Elementary::sqrt_fn: {
      if (a.constant_part() <= 0.0)
        throw_domain("sqrt of a scalar with nonpositive constant term");
      std::vector<Scalar> w(sz, Scalar(0.0));
      w[0] = sqrt(ac[0]);
      for (std::size_t s = 1; s < sz; ++s) {
        Scalar acc = zero();
        for (std::size_t i = 1; i < s; ++i) acc += Scalar(double(s - i)) * w[i] * w[s - i];
        w[s] = (Scalar(0.5) * ac[s] - acc / Scalar(double(s))) / w[0];
      }
      return Scalar::taylor(std::move(w));
    }
    case Elementary::sin_fn:
    case Elementary::cos_fn: {
      std::vector<Scalar> S(sz, Scalar(0.0)), C(sz, Scalar(0.0));
      S[0] = sin(ac[0]);
      C[0] = cos(ac[0]);
      for (std::size_t s = 1; s < sz; ++s) {
        Scalar accS = zero(), accC = zero();
        for (std::size_t j = 1; j <= s; ++j) {
          accS += Scalar(double(j)) * ac[j] * C[s - j];
          accC += Scalar(double(j)) * ac[j] * S[s - j];
        }
        S[s] = accS / Scalar(double(s));
        C[s] = -(accC / Scalar(double(s)));
      }
      return Scalar::taylor(f == Elementary::sin_fn ? std::move(S) : std::move(C));
    }
    case Elementary::tan_fn:
      return taylor_elem(Elementary::sin_fn, a) / taylor_elem(Elementary::cos_fn, a);
    case Elementary::tanh_fn: {
      Scalar e = taylor_elem(Elementary::exp_fn, a + a);
      return (e - Scalar(1.0)) / (e + Scalar(1.0));
    }
  }
  throw_invalid("unreachable elementary");
}

Scalar apply_elem(Elementary f, const Scalar& a) {
  if (a.is_double()) return Scalar(elem_double(f, a.as_double()));
  if (a.is_dual())
    return Scalar::dual(apply_elem(f, a.dual_value()),
                        elem_derivative(f, a.dual_value()) * a.dual_delta());
  return taylor_elem(f, a);
}

} // namespace

Scalar sin(const Scalar& a) { return apply_elem(Elementary::sin_fn, a); }
Scalar cos(const Scalar& a) { return apply_elem(Elementary::cos_fn, a); }
Scalar exp(const Scalar& a) { return apply_elem(Elementary::exp_fn, a); }
Scalar log(const Scalar& a) { return apply_elem(Elementary::log_fn, a); }
Scalar sqrt(const Scalar& a) { return apply_elem(Elementary::sqrt_fn, a); }
Scalar tan(const Scalar& a) { return apply_elem(Elementary::tan_fn, a); }
Scalar tanh(const Scalar& a) { return apply_elem(Elementary::tanh_fn, a); }

Scalar pow(const Scalar& a, const Scalar& b) {
  if (b.is_double()) {
    const double e = b.as_double();
    if (std::nearbyint(e) == e && std::abs(e) <= 1024.0) {
      long n = static_cast<long>(e);
      if (n == 0) return Scalar(1.0);
      bool negative = n < 0;
      unsigned long p = negative ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
      Scalar base = a;
      Scalar acc = Scalar(1.0);
      while (p) {
        if (p & 1UL) acc = acc * base;
        p >>= 1UL;
        if (p) base = base * base;
      }
      if (negative) return Scalar(1.0) / acc;
      return acc;
    }
  }
  return exp(b * log(a));
}

Scalar taylor_mul(const Scalar& a, const Scalar& b) {
  if (!a.is_taylor() || !b.is_taylor())
    throw_shape("taylor_mul expects two Taylor scalars");
  return a * b;
}

Scalar taylor_compose(Elementary f, const Scalar& a) {
  if (!a.is_taylor()) throw_shape("taylor_compose expects a Taylor scalar");
  return taylor_elem(f, a);
}

Scalar delta_component(const Scalar& s) {
  if (s.is_dual()) return s.dual_delta();
  if (s.is_taylor()) {
    const auto& c = s.taylor_coeffs();
    std::vector<Scalar> d;
    d.reserve(c.size());
    for (const auto& ci : c) d.push_back(delta_component(ci));
    return Scalar::taylor(std::move(d));
  }
  return Scalar(0.0);
}

double perturb_derivative(const std::function<Scalar(std::span<const Scalar>)>& f,
                          std::span<const double> point, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= point.size())
    throw_invalid("perturbation index out of range");
  std::vector<Scalar> args;
  args.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    Scalar v(point[i]);
    args.push_back(static_cast<int>(i) == index ? Scalar::dual(v, Scalar(1.0))
                                                : Scalar::dual(v, Scalar(0.0)));
  }
  Scalar r = f(std::span<const Scalar>(args));
  if (!r.is_dual()) return 0.0; // constant in the perturbed coordinate
  return r.dual_delta().as_double();
}

} // namespace liejet
