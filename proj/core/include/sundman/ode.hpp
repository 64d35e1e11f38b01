#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sundman/scalar_function.hpp"

namespace sundman {

using State = std::vector<double>;
using OdeField = std::function<void(double t, const State& y, State& dy)>;

struct IvpError : std::runtime_error {
  IvpError(const std::string& msg, double t, State y)
      : std::runtime_error(msg + " at t=" + std::to_string(t)),
        last_t(t),
        last_state(std::move(y)) {}
  double last_t;
  State last_state;
};

/// Solution of an initial-value problem: accepted steps with endpoint
/// states and derivatives. Dense output between steps is cubic Hermite.
class Trajectory {
 public:
  struct Sample {
    double t;
    State y;
    State dy;
  };
  struct Stats {
    int accepted = 0;
    int rejected = 0;
    double tol = 0.0;
    bool truncated = false;  // stopped early (left the admissible region)
  };

  std::vector<Sample> samples;
  int dimension = 0;
  Stats stats;

  double t0() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }

  State eval(double t) const;
  State eval_derivative(double t) const;

  /// CSV with header "t,x1,...,xn[,v1,...,vn]" (here: all state columns),
  /// 17 significant digits.
  std::string to_csv() const;

 private:
  std::size_t locate(double t) const;
};

/// Embedded Dormand-Prince 5(4) with adaptive steps; local error per step
/// bounded by tol (mixed absolute/relative). If `inside` is provided,
/// integration stops at the first accepted step whose endpoint leaves the
/// region and the trajectory is marked truncated.
Trajectory solve_ivp(const OdeField& field, double t0, State y0, double t_end,
                     double tol,
                     const std::function<bool(const State&)>& inside = nullptr);

}  // namespace sundman
