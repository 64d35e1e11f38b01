#pragma once

#include <string>

#include "sundman/expr.hpp"

namespace sundman {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Open interval (lo, hi), lo < hi.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const { return x > lo && x < hi; }
  double mid() const { return 0.5 * (lo + hi); }
  double length() const { return hi - lo; }
};

/// A single-variable expression with a validity interval and a set of
/// bound named constants (free parameters like omega or k).
class ScalarFunction {
 public:
  ScalarFunction(Expression expr, std::string var, Interval domain,
                 Binding params = {});

  /// Parses `text` over {var} union params' names.
  static ScalarFunction parse(const std::string& text, std::string var,
                              Interval domain, Binding params = {});

  double operator()(double x) const;

  /// Exact symbolic derivative with the same domain and parameters.
  ScalarFunction derivative() const;

  const Expression& expr() const { return expr_; }
  const std::string& var() const { return var_; }
  const Interval& domain() const { return domain_; }
  const Binding& params() const { return params_; }

 private:
  Expression expr_;
  std::string var_;
  Interval domain_;
  Binding params_;
};

}  // namespace sundman
