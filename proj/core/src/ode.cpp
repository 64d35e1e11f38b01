#include "sundman/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sundman {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 4th-order weights for error estimation
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

bool all_finite(const State& y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

std::size_t Trajectory::locate(double t) const {
  if (samples.size() < 2) return 0;
  auto it = std::lower_bound(
      samples.begin(), samples.end(), t,
      [](const Sample& s, double tt) { return s.t < tt; });
  std::size_t i = it - samples.begin();
  if (i == 0) return 0;
  if (i >= samples.size()) return samples.size() - 2;
  return i - 1;
}

State Trajectory::eval(double t) const {
  const std::size_t i = locate(t);
  const Sample& s0 = samples[i];
  const Sample& s1 = samples[std::min(i + 1, samples.size() - 1)];
  const double h = s1.t - s0.t;
  if (h == 0.0) return s0.y;
  const double u = (t - s0.t) / h;
  // cubic Hermite in u
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  State out(dimension);
  for (int k = 0; k < dimension; ++k)
    out[k] = h00 * s0.y[k] + h10 * h * s0.dy[k] + h01 * s1.y[k] +
             h11 * h * s1.dy[k];
  return out;
}

State Trajectory::eval_derivative(double t) const {
  const std::size_t i = locate(t);
  const Sample& s0 = samples[i];
  const Sample& s1 = samples[std::min(i + 1, samples.size() - 1)];
  const double h = s1.t - s0.t;
  if (h == 0.0) return s0.dy;
  const double u = (t - s0.t) / h;
  const double d00 = 6 * u * (u - 1) / h;
  const double d10 = (1 - u) * (1 - 3 * u);
  const double d01 = -d00;
  const double d11 = u * (3 * u - 2);
  State out(dimension);
  for (int k = 0; k < dimension; ++k)
    out[k] = d00 * s0.y[k] + d10 * s0.dy[k] + d01 * s1.y[k] + d11 * s1.dy[k];
  return out;
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  const int n = dimension / 2;
  os << "t";
  if (dimension == 2 * n && n >= 1) {
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= n; ++i) os << ",v" << i;
  } else {
    for (int i = 1; i <= dimension; ++i) os << ",x" << i;
  }
  os << "\n";
  char buf[40];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    os << buf;
    for (double v : s.y) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << "\n";
  }
  return os.str();
}

Trajectory solve_ivp(const OdeField& field, double t0, State y0, double t_end,
                     double tol,
                     const std::function<bool(const State&)>& inside) {
  if (!(tol > 0.0)) throw IvpError("solve_ivp: tol must be positive", t0, y0);
  const int dim = static_cast<int>(y0.size());
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  const double span = std::fabs(t_end - t0);

  Trajectory traj;
  traj.dimension = dim;
  traj.stats.tol = tol;

  State k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  State ytmp(dim), y5(dim), yerr(dim);

  State y = std::move(y0);
  double t = t0;
  field(t, y, k1);
  if (!all_finite(k1)) throw IvpError("solve_ivp: non-finite derivative", t, y);
  traj.samples.push_back({t, y, k1});

  double h = std::min(span, std::max(1e-6 * span, 1e-4));
  const double hmin = 1e-14 * std::max(1.0, span);

  while (dir * (t_end - t) > 0.0) {
    h = std::min(h, std::fabs(t_end - t));
    if (h < hmin)
      throw IvpError("solve_ivp: step underflow (stiffness or singularity)", t, y);
    const double hs = dir * h;

    auto stage = [&](State& out, std::initializer_list<std::pair<double, const State*>> terms) {
      for (int i = 0; i < dim; ++i) {
        double acc = y[i];
        for (const auto& [coef, kk] : terms) acc += hs * coef * (*kk)[i];
        out[i] = acc;
      }
    };
    try {
      stage(ytmp, {{a21, &k1}});
      field(t + c2 * hs, ytmp, k2);
      stage(ytmp, {{a31, &k1}, {a32, &k2}});
      field(t + c3 * hs, ytmp, k3);
      stage(ytmp, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
      field(t + c4 * hs, ytmp, k4);
      stage(ytmp, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
      field(t + c5 * hs, ytmp, k5);
      stage(ytmp, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
      field(t + hs, ytmp, k6);
      stage(y5, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      field(t + hs, y5, k7);
    } catch (const std::exception&) {
      // evaluation failure inside the step: retry smaller
      h *= 0.5;
      ++traj.stats.rejected;
      continue;
    }
    if (!all_finite(y5) || !all_finite(k7)) {
      h *= 0.5;
      ++traj.stats.rejected;
      continue;
    }

    double errnorm = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double y4i = y[i] + hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                      e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = std::max(1.0, std::max(std::fabs(y[i]), std::fabs(y5[i])));
      const double d = (y5[i] - y4i) / sc;
      errnorm += d * d;
    }
    errnorm = std::sqrt(errnorm / dim);

    if (errnorm <= tol) {
      t += hs;
      y = y5;
      k1 = k7;  // FSAL
      traj.samples.push_back({t, y, k1});
      ++traj.stats.accepted;
      if (inside && !inside(y)) {
        traj.stats.truncated = true;
        break;
      }
    } else {
      ++traj.stats.rejected;
    }
    const double factor =
        errnorm > 0.0
            ? std::clamp(0.9 * std::pow(tol / errnorm, 0.2), 0.2, 5.0)
            : 5.0;
    h *= factor;
  }
  return traj;
}

}  // namespace sundman
