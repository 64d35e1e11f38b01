#pragma once

#include <functional>
#include <optional>

#include "sundman/numerics.hpp"
#include "sundman/scalar_function.hpp"

namespace sundman {

/// A real function of one variable with optional derivative evaluators and
/// an optional closed form. Coefficient functions start life symbolic
/// (derivatives exact); coordinate changes and quadrature-backed
/// antiderivatives produce numeric-only instances whose derivatives are
/// supplied as closures via chain rules.
struct RealFn {
  Fn1 f;
  Fn1 df, d2f, d3f;  // may be empty
  Interval domain{0.0, 1.0};
  std::optional<Expression> closed_form;
  std::string var = "x";
  Binding params;

  double operator()(double x) const { return f(x); }
  bool has_d1() const { return static_cast<bool>(df); }
  bool has_d2() const { return static_cast<bool>(d2f); }
  bool has_d3() const { return static_cast<bool>(d3f); }
  double d1(double x) const;
  double d2(double x) const;
  double d3(double x) const;

  static RealFn from_scalar(const ScalarFunction& s);
  static RealFn from_expression(const Expression& e, std::string var,
                                Interval domain, Binding params = {});
  static RealFn constant(double c, Interval domain);
  static RealFn identity(Interval domain);
};

}  // namespace sundman
