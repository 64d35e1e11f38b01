#pragma once

#include <optional>
#include <vector>

#include "sundman/ode.hpp"
#include "sundman/real_fn.hpp"

namespace sundman {

/// A second-order system x_i'' = X_i(x, v) in n dimensions. Components are
/// symbolic expressions over the variables x1..xn, v1..vn (for n = 1 the
/// aliases x, v are accepted and renamed on construction).
struct SodeField {
  int n = 1;
  std::vector<Expression> components;
  std::vector<Interval> domain;  // box in x-space
  Binding params;

  SodeField(int n, std::vector<Expression> components,
            std::vector<Interval> domain, Binding params = {});

  /// Parses component strings against the canonical variable set.
  static SodeField parse(int n, const std::vector<std::string>& components,
                         std::vector<Interval> domain, Binding params = {});

  double component(int i, const State& x, const State& v) const;

  /// The 2n-dimensional first-order field (x, v) -> (v, X(x,v)).
  OdeField ode() const;

  bool inside(const State& x) const;
};

/// A position-only function of constant sign, used as the time-rescaling
/// factor dt = f dtau.
struct BasicFunction {
  Expression f;
  int n = 1;
  std::vector<Interval> domain;
  Binding params;
  int sign = +1;  // validated on a sample grid

  BasicFunction(Expression f, int n, std::vector<Interval> domain,
                Binding params = {});

  static BasicFunction parse(const std::string& text, int n,
                             std::vector<Interval> domain, Binding params = {});

  double operator()(const State& x) const;
};

/// Rescales time by dt = f dtau and rewrites the system in the
/// quasi-velocities vbar = f v. The returned field has components
/// f^2 X_i(x, v/f) + (sum_j (1/f) df/dx_j v_j) v_i, built symbolically.
SodeField transform_system(const SodeField& field, const BasicFunction& f);

struct LinearCheck {
  bool linear = false;
  std::vector<std::vector<double>> A, B;  // X = A x + B v when linear
  double residual = 0.0;
};

/// True iff every component is of the form sum_j (A_ij x_j + B_ij v_j) with
/// constant matrices: degree-1 homogeneity under the dilation
/// sum(x_j d/dx_j + v_j d/dv_j) tested on samples, then a least-squares
/// recovery of (A, B) with residual check.
LinearCheck check_linear(const SodeField& field);

struct FibreLinearCheck {
  bool fibre_linear = false;
  std::vector<std::vector<Expression>> A;  // A_ij(x) = dX_i/dv_j when true
  double residual = 0.0;
};

/// True iff every component is linear homogeneous in the velocities
/// (sum_k v_k dX_i/dv_k = X_i); the certificate keeps the position-dependent
/// coefficient functions symbolically.
FibreLinearCheck check_fibre_linear(const SodeField& field);

struct InhomLinearCheck {
  std::vector<std::vector<double>> A, B;
  std::vector<double> C;  // X = A x + B v + C
  double residual = 0.0;
};

/// Accepts fields that are linear up to a constant vertical shift:
/// X_i - (dilation X)_i must be constant, then (A, B) is recovered from
/// X - C as in check_linear.
std::optional<InhomLinearCheck> check_inhomogeneous_linear(
    const SodeField& field);

/// Structure coefficient of the rescaled frame Y_i = (1/f) d/dx_i:
/// gamma^k_ij = (1/f^2)(df/dx_j delta^k_i - df/dx_i delta^k_j).
/// Indices are 1-based.
Expression hamel_symbol(const BasicFunction& f, int i, int j, int k);

/// One-degree-of-freedom natural system q'' = -V'(q) at a fixed energy
/// E = v^2/2 + V(q).
struct NaturalSystem {
  ScalarFunction potential;
  double energy = 0.0;
};

struct EnergyReduction {
  // f^2 = a q^2 + b q + c,  f^2 V = p2 q^2 + p1 q + p0
  double a = 0, b = 0, c = 0;
  double p2 = 0, p1 = 0, p0 = 0;
  // f^2 (E - V) = A q^2 + B q + C with the target q'' = 2 A q + B in tau
  double A = 0, B = 0, C = 0;
};

/// Checks whether rescaling time by dt = f dtau turns the energy-level
/// dynamics into a linear equation: f^2 and f^2 V must both be quadratic
/// polynomials in q (least-squares fit on 64 samples). The coefficients are
/// affine in E; with fixed_energy the combination f^2 (E - V) is fitted
/// directly for the stored E instead.
std::optional<EnergyReduction> energy_reduce(const NaturalSystem& sys,
                                             const ScalarFunction& f,
                                             bool fixed_energy = false);

struct EnergySolution {
  double exponent = 1.0;  // f(q) = q^p
  EnergyReduction reduction;
};

/// Tries f(q) = q^p over the ansatz (default p in {-2,-1,-1/2,1/2,1,2,3}),
/// smallest |p| first, and returns the first exponent accepted by
/// energy_reduce.
std::optional<EnergySolution> find_energy_f(
    const NaturalSystem& sys,
    std::vector<double> ansatz = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0});

}  // namespace sundman
