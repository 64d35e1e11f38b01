#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "sundman/scalar_function.hpp"

namespace sundman {

using Fn1 = std::function<double(double)>;

struct QuadError : std::runtime_error {
  QuadError(const std::string& msg, double best, double bound)
      : std::runtime_error(msg), best_estimate(best), error_bound(bound) {}
  double best_estimate;
  double error_bound;
};

struct MonotoneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Adaptive Gauss-Kronrod (G7,K15) quadrature. Estimated absolute error
/// <= tol * max(1, |result|). Throws QuadError after 2^16 panels.
double quad(const Fn1& f, double a, double b, double tol);

/// Quadrature-backed antiderivative F with F(x0) = 0 and F' = f.
/// A fixed knot grid over the domain caches cumulative integrals so each
/// evaluation is a binary search plus one local panel.
class NumericFunction {
 public:
  NumericFunction(Fn1 f, double x0, Interval domain, double tol,
                  int knots = 256);

  double operator()(double x) const;
  const Fn1& integrand() const { return f_; }
  double base_point() const { return x0_; }
  const Interval& domain() const { return domain_; }
  double tolerance() const { return tol_; }

  /// (x, F(x)) pairs at the cached knots.
  std::vector<std::pair<double, double>> knot_table() const;

 private:
  Fn1 f_;
  double x0_;
  Interval domain_;
  double tol_;
  std::vector<double> knot_x_;
  std::vector<double> knot_F_;
};

/// Solves F(x) = y for strictly monotone F on the bracket, by bisection
/// safeguarded secant steps. |F(x)-y| <= tol * max(1,|y|).
double invert_monotone(const Fn1& F, double y, Interval bracket, double tol);

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

/// Least-squares line through >= 3 samples with distinct x.
AffineFit fit_affine(const std::vector<std::pair<double, double>>& samples);

struct PolyFit {
  std::vector<double> coeff;  // coeff[k] multiplies x^k
  double max_residual = 0.0;
};

/// Least-squares polynomial of the given degree.
PolyFit fit_poly(const std::vector<std::pair<double, double>>& samples,
                 int degree);

/// Dense least squares min ||A c - rhs|| via normal equations; A is
/// row-major, all rows the same width. For the small systems used by the
/// linearity detectors.
std::vector<double> lstsq(const std::vector<std::vector<double>>& A,
                          const std::vector<double>& rhs);

}  // namespace sundman
