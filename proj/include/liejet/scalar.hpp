#ifndef LIEJET_SCALAR_HPP
#define LIEJET_SCALAR_HPP

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "liejet/error.hpp"

namespace liejet {

class Scalar;

/// Truncated Taylor payload. Coefficients are normalized: c[r] = f^(r)(0)/r!.
/// The degree is fixed by the coefficient count; arithmetic between Taylor
/// scalars of different degrees is a shape error, never silent truncation.
struct TaylorRep {
  std::vector<Scalar> c;
};

/// First-order perturbation payload: value + eps*delta with eps^2 = 0.
/// vd[0] is the value, vd[1] the delta; both share one shape.
struct DualRep {
  std::vector<Scalar> vd;
};

/// Closed scalar family the whole engine evaluates over.
///
/// A Scalar is a plain double, a truncated Taylor expansion whose
/// coefficients are themselves Scalars, or a first-order perturbation whose
/// components are Scalars. Nesting is unrestricted, which is what makes
/// composed operators (a total time derivative of a partial derivative of a
/// total time derivative, ...) evaluate without special cases: each layer
/// wraps the entries it receives and the arithmetic recurses.
///
/// Mixing rules for binary operations:
///   - double broadcasts against anything (a constant in every direction),
///   - Taylor/Taylor requires equal degrees,
///   - Dual promotes the other operand with a zero delta.
class Scalar {
public:
  Scalar() : v_(0.0) {}
  Scalar(double x) : v_(x) {}

  static Scalar taylor(std::vector<Scalar> coeffs);
  /// Constant c as a degree-`degree` Taylor scalar: [c, 0, ..., 0].
  static Scalar taylor_constant(double value, int degree);
  /// value + t as a degree-`degree` Taylor scalar (degree >= 1).
  static Scalar taylor_variable(double value, int degree);
  static Scalar dual(Scalar value, Scalar delta);

  bool is_double() const { return std::holds_alternative<double>(v_); }
  bool is_taylor() const { return std::holds_alternative<TaylorRep>(v_); }
  bool is_dual() const { return std::holds_alternative<DualRep>(v_); }

  /// Unwraps a plain double; shape error on Taylor/Dual kinds.
  double as_double() const;

  int taylor_degree() const;
  const std::vector<Scalar>& taylor_coeffs() const;
  /// j-th Taylor coefficient; for non-Taylor kinds j=0 yields the scalar
  /// itself and j>0 a zero of matching shape.
  Scalar coeff(int j) const;

  const Scalar& dual_value() const;
  const Scalar& dual_delta() const;

  /// Innermost constant term, recursing through all layers. Used for domain
  /// checks (log/sqrt/division) which depend only on the base point.
  double constant_part() const;

  /// Zero (resp. one) with this scalar's exact shape.
  Scalar zero_like() const;
  Scalar one_like() const;

  std::string to_string() const;

  friend Scalar operator+(const Scalar&, const Scalar&);
  friend Scalar operator-(const Scalar&, const Scalar&);
  friend Scalar operator*(const Scalar&, const Scalar&);
  friend Scalar operator/(const Scalar&, const Scalar&);
  friend Scalar operator-(const Scalar&);

  Scalar& operator+=(const Scalar& o) { *this = *this + o; return *this; }
  Scalar& operator-=(const Scalar& o) { *this = *this - o; return *this; }
  Scalar& operator*=(const Scalar& o) { *this = *this * o; return *this; }
  Scalar& operator/=(const Scalar& o) { *this = *this / o; return *this; }

private:
  std::variant<double, TaylorRep, DualRep> v_;
};

Scalar sin(const Scalar&);
Scalar cos(const Scalar&);
Scalar exp(const Scalar&);
Scalar log(const Scalar&);
Scalar sqrt(const Scalar&);
Scalar tan(const Scalar&);
Scalar tanh(const Scalar&);
/// Integer exponents (detected on double-kind b) use repeated squaring;
/// anything else goes through exp(b*log(a)).
Scalar pow(const Scalar& a, const Scalar& b);

/// Truncated Cauchy product of two Taylor scalars of equal degree.
Scalar taylor_mul(const Scalar& a, const Scalar& b);

enum class Elementary { sin_fn, cos_fn, exp_fn, log_fn, sqrt_fn, tan_fn, tanh_fn };

/// f composed with a Taylor argument via the coefficient recurrences.
Scalar taylor_compose(Elementary f, const Scalar& a);

/// Perturbation part of s: the coefficient of eps once every Taylor layer is
/// mapped through. doubles have none (0), perturbation scalars yield their
/// delta, Taylor scalars the coefficient-wise delta.
Scalar delta_component(const Scalar& s);

/// Partial derivative of f at a real point along coordinate `index`,
/// computed by seeding a unit perturbation on that coordinate.
double perturb_derivative(const std::function<Scalar(std::span<const Scalar>)>& f,
                          std::span<const double> point, int index);

} // namespace liejet

#endif
