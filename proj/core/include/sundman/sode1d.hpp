#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "sundman/real_fn.hpp"

namespace sundman {

/// The quadratic normal form x'' + gamma(x) x'^2 + A(x) x' + b(x) = 0
/// on a common validity interval.
struct QuadraticSode {
  RealFn gamma, A, b;
  Interval domain;

  QuadraticSode(RealFn gamma, RealFn A, RealFn b, Interval domain);

  static QuadraticSode from_scalar(const ScalarFunction& gamma,
                                   const ScalarFunction& A,
                                   const ScalarFunction& b, Interval domain);

  /// Right-hand side of x'' = -gamma v^2 - A v - b.
  double rhs(double x, double v) const;
};

/// A generalised Sundman transformation y = phi(x), dtau = h(x) dt.
/// h positive and phi strictly monotone, both validated by sampling.
/// require_monotone = false admits a phi whose slope changes sign (needed
/// for the signed unit-forcing transform when b crosses zero); such a
/// transform still maps trajectories correctly but cannot be inverted or
/// factorized through phi^-1.
struct GenSundman {
  RealFn h, phi;
  Interval domain;
  bool monotone = true;

  GenSundman(RealFn h, RealFn phi, Interval domain,
             bool require_monotone = true);
  static GenSundman identity(Interval domain);
};

/// Group product: apply t1 first, then t2. ((h2 o phi1) h1, phi2 o phi1).
GenSundman compose(const GenSundman& t2, const GenSundman& t1);

/// Group inverse ((1/h) o phi^-1, phi^-1); phi^-1 is realized numerically.
GenSundman inverse(const GenSundman& t);

enum class FactorOrder {
  SundmanThenCoordinate,  // (h,phi) = (1,phi) * (h,id)
  CoordinateThenSundman,  // (h,phi) = (h o phi^-1, id) * (1,phi)
};

struct Factorization {
  GenSundman coordinate_part;
  GenSundman sundman_part;
  FactorOrder order;
};

Factorization factorize(const GenSundman& t, FactorOrder order);

/// Maps a phase point: y = phi(x), w = phi'(x) v / h(x).
std::pair<double, double> map_state(const GenSundman& t, double x, double v);

/// P = (A d/dx + gamma A - A') b = A b' + gamma A b - A' b.
/// Unchanged by coordinate changes; P -> P/h^3 under a pure Sundman
/// transformation. Symbolic when all coefficients carry closed forms.
RealFn p_invariant(const QuadraticSode& s);

/// Q = (A d/dx - 3A')(A d/dx + gamma A - A') b = A P' - 3 A' P.
/// Q -> Q/h^4 under a pure Sundman transformation and Q -> Q/phi' under a
/// coordinate change (P invariance plus d/dxbar = (1/phi') d/dx force the
/// 1/phi' factor); either way Q = 0 is preserved. Symbolic when all
/// coefficients carry closed forms.
RealFn q_invariant(const QuadraticSode& s);

/// Pure Sundman transformation of the coefficients:
/// (gamma + h'/h, A/h, b/h^2), same coordinate domain.
QuadraticSode apply_pure_sundman(const QuadraticSode& s, const RealFn& h);

/// Coordinate change x -> xbar = phi(x): A -> A, b -> J b,
/// gamma -> (1/J)(gamma - J'/J) with J = phi', expressed as functions of
/// xbar via the numeric inverse of phi. New domain is phi(domain),
/// oriented increasingly.
QuadraticSode apply_coordinate_change(const QuadraticSode& s, const RealFn& phi);

/// Transforms the coefficients through a full (h, phi): pure Sundman part
/// first, then the coordinate change.
QuadraticSode apply(const GenSundman& t, const QuadraticSode& s);

struct NotQuadratic {
  std::string reason;
};

/// Reads (gamma, A, b) off the right-hand side X(x, v) of x'' = X, after
/// checking d^3 X / dv^3 == 0 on a sample grid.
std::variant<QuadraticSode, NotQuadratic> normalize(const Expression& X,
                                                    Interval domain,
                                                    Binding params = {});

struct LinearizeConfig {
  double q_tol = 1e-9;
  double zero_tol = 1e-9;
  double affine_tol = 1e-7;
  double quad_tol = 1e-12;
  std::optional<double> base_point;  // default: domain midpoint
  int grid_n = 64;
  bool strict_b_sign = false;        // fail on sign changes of b in the A==0 branch
  bool split_on_sign_change = false; // restrict to the constant-sign interval
                                     // around the base point instead of failing
};

enum class LinCase {
  NotQuadratic,
  FreeParticle,     // target y'' = 0
  UnitForcing,      // target y'' + 1 = 0
  Linear,           // target y'' + alpha y' + B y + C = 0
  NotLinearisable,
};

const char* to_string(LinCase c);

struct LinearisationOutcome {
  LinCase kind = LinCase::NotLinearisable;
  std::optional<GenSundman> transform;
  double alpha = 0.0, B = 0.0, C = 0.0;
  double base_point = 0.0;  // phi anchor and quadrature base; K is fixed to 1
  double scale_K = 1.0;
  double q_max = 0.0;
  double q_scale = 1.0;
  std::vector<std::pair<double, double>> q_samples;
  std::string note;

  bool linearisable() const {
    return kind == LinCase::FreeParticle || kind == LinCase::UnitForcing ||
           kind == LinCase::Linear;
  }
};

struct SignChangeError : std::runtime_error {
  SignChangeError(const std::string& what_fn, double lo, double hi)
      : std::runtime_error("sign of " + what_fn +
                           " changes on subinterval (" + std::to_string(lo) +
                           ", " + std::to_string(hi) + ")"),
        lo(lo),
        hi(hi) {}
  double lo, hi;
};

struct DiagnosticsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The three-case decision tree.
LinearisationOutcome linearize(const QuadraticSode& s,
                               const LinearizeConfig& config = {});

}  // namespace sundman
