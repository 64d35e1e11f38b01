#pragma once

#include "sundman/sode1d.hpp"
#include "sundman/sodend.hpp"

namespace sundman {

/// Closed-form solution of y'' + alpha y' + B y + C = 0 with y(0) = y0,
/// y'(0) = w0, by characteristic roots.
class LinearTarget {
 public:
  LinearTarget(double alpha, double B, double C, double y0, double w0);

  double operator()(double tau) const;
  double deriv(double tau) const;

 private:
  enum class Regime { Polynomial, DistinctReal, Repeated, Complex };
  Regime regime_;
  double alpha_, B_, C_;
  double r1_ = 0, r2_ = 0, om_ = 0;  // roots / angular frequency
  double c1_ = 0, c2_ = 0;           // homogeneous amplitudes
  double yp0_ = 0, yp1_ = 0;         // particular part y_p = yp0 + yp1 tau (+ quad)
  double ypq_ = 0;                   // coefficient of tau^2 in y_p
};

inline LinearTarget solve_linear_target(double alpha, double B, double C,
                                        double y0, double w0) {
  return LinearTarget(alpha, B, C, y0, w0);
}

/// Agreement between a trajectory pushed through a transformation and the
/// independently computed solution in the rescaled time.
struct CorrespondenceReport {
  double max_state_error = 0.0;
  double max_velocity_error = 0.0;  // with a relative floor of 1

  // per-sample data (equispaced in t)
  std::vector<double> t, tau;
  std::vector<State> state_orig;    // x(t)
  std::vector<State> state_mapped;  // image of (x, v)(t) under the transform
  std::vector<State> state_target;  // independent solution at tau(t)
  std::vector<State> vel_mapped, vel_target;

  Trajectory::Stats stats;
  bool truncated = false;
  double tau_augmented_deviation = 0.0;  // quadrature vs augmented-state tau
  double accel_residual = -1.0;          // second-derivative check, if requested
  std::vector<std::pair<double, double>> accel_samples;  // (tau, residual)

  double tol = 0.0;
  bool pass = false;
  std::string note;
};

/// Integrates the quadratic equation in t, reparametrizes by
/// tau = int h(x(t)) dt, maps states through (h, phi), and compares against
/// the closed-form linear target. inject_h_scale != 1 corrupts h on purpose
/// (fault-injection hook).
CorrespondenceReport verify_linearisation(const QuadraticSode& s,
                                          const LinearisationOutcome& outcome,
                                          double x0, double v0, double T,
                                          double ivp_tol, double tol,
                                          double inject_h_scale = 1.0);

/// n-dimensional check: integrates the field in t and its quasi-velocity
/// transform in tau = int dt/f, and compares x(t) with xbar(tau(t)) and
/// f(x) v with vbar(tau(t)). When target_accel is given, additionally
/// measures max |d^2 xbar_c / dtau^2 - target_accel(xbar, vbar)| along the
/// transformed trajectory by a 5-point stencil (component c =
/// accel_component).
CorrespondenceReport verify_field_transform(
    const SodeField& field, const BasicFunction& f, State x0, State v0,
    double T, double ivp_tol, double tol,
    const std::function<double(const State&, const State&)>& target_accel =
        nullptr,
    int accel_component = 0);

}  // namespace sundman
