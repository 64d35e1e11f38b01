#include "sundman/verify.hpp"

#include <algorithm>
#include <cmath>

namespace sundman {

LinearTarget::LinearTarget(double alpha, double B, double C, double y0,
                           double w0)
    : alpha_(alpha), B_(B), C_(C) {
  // snap near-degenerate coefficients: a fitted B of order 1e-16 would
  // otherwise produce a particular solution -C/B of order 1e16
  const double coeff_scale = std::max({1.0, std::fabs(alpha), std::fabs(C)});
  if (std::fabs(B) <= 1e-12 * coeff_scale) B = B_ = 0.0;
  if (std::fabs(alpha) <= 1e-12 * coeff_scale) alpha = alpha_ = 0.0;
  // particular solution
  if (B != 0.0) {
    yp0_ = -C / B;
  } else if (alpha != 0.0) {
    yp1_ = -C / alpha;
  } else {
    ypq_ = -C / 2.0;
  }
  const double z0 = y0 - yp0_;
  const double z1 = w0 - yp1_;

  if (alpha == 0.0 && B == 0.0) {
    regime_ = Regime::Polynomial;
    c1_ = z0;
    c2_ = z1;
    return;
  }
  const double disc = alpha * alpha - 4.0 * B;
  const double scale = std::max({1.0, alpha * alpha, std::fabs(B)});
  if (disc > 1e-14 * scale) {
    regime_ = Regime::DistinctReal;
    const double s = std::sqrt(disc);
    r1_ = (-alpha - s) / 2.0;
    r2_ = (-alpha + s) / 2.0;
    c2_ = (z1 - r1_ * z0) / (r2_ - r1_);
    c1_ = z0 - c2_;
  } else if (disc < -1e-14 * scale) {
    regime_ = Regime::Complex;
    r1_ = -alpha / 2.0;
    om_ = std::sqrt(-disc) / 2.0;
    c1_ = z0;
    c2_ = (z1 - r1_ * z0) / om_;
  } else {
    regime_ = Regime::Repeated;
    r1_ = -alpha / 2.0;
    c1_ = z0;
    c2_ = z1 - r1_ * z0;
  }
}

double LinearTarget::operator()(double tau) const {
  const double yp = yp0_ + yp1_ * tau + ypq_ * tau * tau;
  switch (regime_) {
    case Regime::Polynomial:
      return yp + c1_ + c2_ * tau;
    case Regime::DistinctReal:
      return yp + c1_ * std::exp(r1_ * tau) + c2_ * std::exp(r2_ * tau);
    case Regime::Repeated:
      return yp + (c1_ + c2_ * tau) * std::exp(r1_ * tau);
    case Regime::Complex:
      return yp + std::exp(r1_ * tau) *
                      (c1_ * std::cos(om_ * tau) + c2_ * std::sin(om_ * tau));
  }
  return yp;
}

double LinearTarget::deriv(double tau) const {
  const double ypd = yp1_ + 2.0 * ypq_ * tau;
  switch (regime_) {
    case Regime::Polynomial:
      return ypd + c2_;
    case Regime::DistinctReal:
      return ypd + c1_ * r1_ * std::exp(r1_ * tau) +
             c2_ * r2_ * std::exp(r2_ * tau);
    case Regime::Repeated:
      return ypd + (c2_ + r1_ * (c1_ + c2_ * tau)) * std::exp(r1_ * tau);
    case Regime::Complex: {
      const double e = std::exp(r1_ * tau);
      const double co = std::cos(om_ * tau), si = std::sin(om_ * tau);
      return ypd + e * (r1_ * (c1_ * co + c2_ * si) +
                        om_ * (-c1_ * si + c2_ * co));
    }
  }
  return ypd;
}

namespace {

constexpr int kSamples = 256;
constexpr double kTauQuadTol = 1e-12;

double effective_end(const Trajectory& traj) {
  if (!traj.stats.truncated) return traj.samples.back().t;
  if (traj.samples.size() < 2)
    throw DomainError("verify: trajectory leaves the domain immediately");
  // the final sample is the first one outside the region
  return traj.samples[traj.samples.size() - 2].t;
}

/// tau(t) at the requested (increasing) times, by quadrature of `rate`
/// along the dense output, one panel per accepted step.
std::vector<double> accumulate_tau(const Trajectory& traj,
                                   const std::function<double(const State&)>& rate,
                                   const std::vector<double>& ts) {
  const auto g = [&](double t) { return rate(traj.eval(t)); };
  std::vector<double> out;
  out.reserve(ts.size());
  std::size_t step = 0;
  double cum = 0.0;
  for (double t : ts) {
    while (step + 1 < traj.samples.size() && traj.samples[step + 1].t <= t) {
      cum += quad(g, traj.samples[step].t, traj.samples[step + 1].t,
                  kTauQuadTol);
      ++step;
    }
    const double t0 = traj.samples[step].t;
    out.push_back(t > t0 ? cum + quad(g, t0, t, kTauQuadTol) : cum);
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

/// Max deviation between quadrature-based tau and an augmented-state
/// integration of tau' = rate.
double augmented_tau_deviation(const OdeField& base, int dim,
                               const std::function<double(const State&)>& rate,
                               const State& y0, double t_end, double tol,
                               const std::vector<double>& ts,
                               const std::vector<double>& taus) {
  State aug0 = y0;
  aug0.push_back(0.0);
  OdeField field = [base, dim, rate](double t, const State& y, State& dy) {
    const State core(y.begin(), y.begin() + dim);
    State dcore(dim);
    base(t, core, dcore);
    dy.resize(dim + 1);
    std::copy(dcore.begin(), dcore.end(), dy.begin());
    dy[dim] = rate(core);
  };
  const Trajectory traj = solve_ivp(field, 0.0, aug0, t_end, tol);
  double dev = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    dev = std::max(dev, std::fabs(traj.eval(ts[i])[dim] - taus[i]));
  return dev;
}

}  // namespace

CorrespondenceReport verify_linearisation(const QuadraticSode& s,
                                          const LinearisationOutcome& outcome,
                                          double x0, double v0, double T,
                                          double ivp_tol, double tol,
                                          double inject_h_scale) {
  if (!outcome.linearisable() || !outcome.transform)
    throw DomainError("verify_linearisation: outcome carries no transform");
  if (x0 <= s.domain.lo || x0 >= s.domain.hi)
    throw DomainError("verify_linearisation: x0 outside the domain");

  const GenSundman& tr = *outcome.transform;
  const double K = inject_h_scale;
  const Interval dom = s.domain;

  const OdeField field = [&s](double, const State& y, State& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = s.rhs(y[0], y[1]);
  };
  const auto inside = [dom](const State& y) { return dom.contains(y[0]); };

  CorrespondenceReport rep;
  rep.tol = tol;
  const Trajectory traj = solve_ivp(field, 0.0, {x0, v0}, T, ivp_tol, inside);
  rep.stats = traj.stats;
  rep.truncated = traj.stats.truncated;
  const double T_eff = effective_end(traj);
  if (rep.truncated)
    rep.note += "trajectory left the domain; comparison truncated at t=" +
                std::to_string(T_eff) + "; ";

  rep.t = linspace(0.0, T_eff, kSamples);
  const auto rate = [&tr, K](const State& y) { return K * tr.h(y[0]); };
  rep.tau = accumulate_tau(traj, rate, rep.t);
  rep.tau_augmented_deviation = augmented_tau_deviation(
      field, 2, rate, {x0, v0}, T_eff, ivp_tol, rep.t, rep.tau);

  const double y0m = tr.phi(x0);
  const double w0m = tr.phi.d1(x0) * v0 / (K * tr.h(x0));
  const LinearTarget target(outcome.alpha, outcome.B, outcome.C, y0m, w0m);

  for (int i = 0; i < kSamples; ++i) {
    const State y = traj.eval(rep.t[i]);
    const double x = y[0], v = y[1];
    const double ym = tr.phi(x);
    const double wm = tr.phi.d1(x) * v / (K * tr.h(x));
    const double yt = target(rep.tau[i]);
    const double wt = target.deriv(rep.tau[i]);
    rep.state_orig.push_back({x, v});
    rep.state_mapped.push_back({ym});
    rep.state_target.push_back({yt});
    rep.vel_mapped.push_back({wm});
    rep.vel_target.push_back({wt});
    rep.max_state_error = std::max(rep.max_state_error, std::fabs(ym - yt));
    rep.max_velocity_error =
        std::max(rep.max_velocity_error,
                 std::fabs(wm - wt) / std::max(1.0, std::fabs(wt)));
  }
  rep.pass = rep.max_state_error <= tol && rep.max_velocity_error <= tol;
  return rep;
}

CorrespondenceReport verify_field_transform(
    const SodeField& field, const BasicFunction& f, State x0, State v0,
    double T, double ivp_tol, double tol,
    const std::function<double(const State&, const State&)>& target_accel,
    int accel_component) {
  const int n = field.n;
  if (static_cast<int>(x0.size()) != n || static_cast<int>(v0.size()) != n)
    throw DomainError("verify_field_transform: dimension mismatch");

  CorrespondenceReport rep;
  rep.tol = tol;

  State y0 = x0;
  y0.insert(y0.end(), v0.begin(), v0.end());
  const OdeField ode = field.ode();
  const auto inside = [&field, n](const State& y) {
    return field.inside(State(y.begin(), y.begin() + n));
  };
  const Trajectory traj = solve_ivp(ode, 0.0, y0, T, ivp_tol, inside);
  rep.stats = traj.stats;
  rep.truncated = traj.stats.truncated;
  const double T_eff = effective_end(traj);
  if (rep.truncated)
    rep.note += "trajectory left the domain; comparison truncated at t=" +
                std::to_string(T_eff) + "; ";

  std::vector<double> ts = linspace(0.0, T_eff, kSamples);
  const auto rate = [&f, n](const State& y) {
    return 1.0 / f(State(y.begin(), y.begin() + n));
  };
  std::vector<double> taus = accumulate_tau(traj, rate, ts);
  rep.tau_augmented_deviation = augmented_tau_deviation(
      ode, 2 * n, rate, y0, T_eff, ivp_tol, ts, taus);

  // transformed system, integrated independently in tau from (x0, f(x0) v0)
  const SodeField bar = transform_system(field, f);
  const double f0 = f(x0);
  State ybar0 = x0;
  for (double v : v0) ybar0.push_back(f0 * v);
  const double tau_end = taus.back();
  const Trajectory bart =
      solve_ivp(bar.ode(), 0.0, ybar0, tau_end, ivp_tol, inside);
  double tau_eff = tau_end;
  if (bart.stats.truncated) {
    tau_eff = effective_end(bart);
    rep.note += "transformed trajectory truncated at tau=" +
                std::to_string(tau_eff) + "; ";
    rep.truncated = true;
  }

  for (int i = 0; i < kSamples; ++i) {
    if (taus[i] > tau_eff) break;
    const State y = traj.eval(ts[i]);
    const State x(y.begin(), y.begin() + n);
    const State v(y.begin() + n, y.end());
    const State yb = bart.eval(taus[i]);
    const double fx = f(x);

    rep.t.push_back(ts[i]);
    rep.tau.push_back(taus[i]);
    rep.state_orig.push_back(y);
    State mapped_x = x, mapped_v(n), target_x(n), target_v(n);
    for (int j = 0; j < n; ++j) {
      mapped_v[j] = fx * v[j];
      target_x[j] = yb[j];
      target_v[j] = yb[n + j];
      rep.max_state_error =
          std::max(rep.max_state_error, std::fabs(x[j] - yb[j]));
      rep.max_velocity_error =
          std::max(rep.max_velocity_error,
                   std::fabs(mapped_v[j] - yb[n + j]) /
                       std::max(1.0, std::fabs(yb[n + j])));
    }
    rep.state_mapped.push_back(std::move(mapped_x));
    rep.vel_mapped.push_back(std::move(mapped_v));
    rep.state_target.push_back(std::move(target_x));
    rep.vel_target.push_back(std::move(target_v));
  }

  if (target_accel) {
    const double htau = 1e-3 * tau_eff;
    double resid = 0.0;
    const int c = accel_component;
    for (int i = 0; i < kSamples; ++i) {
      const double tau = 2 * htau + (tau_eff - 4 * htau) * i / (kSamples - 1);
      const double ym2 = bart.eval(tau - 2 * htau)[c];
      const double ym1 = bart.eval(tau - htau)[c];
      const double yc = bart.eval(tau)[c];
      const double yp1 = bart.eval(tau + htau)[c];
      const double yp2 = bart.eval(tau + 2 * htau)[c];
      const double d2 =
          (-ym2 + 16 * ym1 - 30 * yc + 16 * yp1 - yp2) / (12 * htau * htau);
      const State yb = bart.eval(tau);
      const State xb(yb.begin(), yb.begin() + n);
      const State vb(yb.begin() + n, yb.end());
      const double r = std::fabs(d2 - target_accel(xb, vb));
      rep.accel_samples.emplace_back(tau, r);
      resid = std::max(resid, r);
    }
    rep.accel_residual = resid;
  }

  rep.pass = rep.max_state_error <= tol && rep.max_velocity_error <= tol;
  return rep;
}

}  // namespace sundman
