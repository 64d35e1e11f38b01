#include "sundman/sodend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace sundman {

namespace {

std::string xname(int j) { return "x" + std::to_string(j + 1); }
std::string vname(int j) { return "v" + std::to_string(j + 1); }

std::set<std::string> field_variables(int n, const Binding& params,
                                      bool with_velocities) {
  std::set<std::string> vars;
  for (int j = 0; j < n; ++j) {
    vars.insert(xname(j));
    if (with_velocities) vars.insert(vname(j));
  }
  if (n == 1) {
    vars.insert("x");
    if (with_velocities) vars.insert("v");
  }
  for (const auto& [k, v] : params) vars.insert(k);
  return vars;
}

Expression canonicalize_1d(Expression e, bool with_velocities) {
  e = e.substitute("x", Expression::variable("x1"));
  if (with_velocities) e = e.substitute("v", Expression::variable("v1"));
  return e;
}

/// All combinations of k probe points per dimension over the given boxes,
/// capped: above the cap a seeded uniform sample of `cap` points is used.
std::vector<State> box_grid(const std::vector<Interval>& box, int k,
                            std::size_t cap = 4096) {
  const std::size_t n = box.size();
  double total = 1;
  for (std::size_t d = 0; d < n; ++d) total *= k;
  std::vector<State> pts;
  if (total <= static_cast<double>(cap)) {
    std::vector<int> idx(n, 0);
    pts.reserve(static_cast<std::size_t>(total));
    for (;;) {
      State p(n);
      for (std::size_t d = 0; d < n; ++d)
        p[d] = box[d].lo + (idx[d] + 0.5) * box[d].length() / k;
      pts.push_back(std::move(p));
      std::size_t d = 0;
      while (d < n && ++idx[d] == k) idx[d++] = 0;
      if (d == n) break;
    }
  } else {
    std::mt19937 rng(20240817);
    pts.reserve(cap);
    for (std::size_t s = 0; s < cap; ++s) {
      State p(n);
      for (std::size_t d = 0; d < n; ++d) {
        std::uniform_real_distribution<double> u(box[d].lo, box[d].hi);
        p[d] = u(rng);
      }
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

std::vector<Interval> velocity_box(int n) {
  return std::vector<Interval>(n, Interval{-2.0, 2.0});
}

Binding bind_state(const Binding& params, const State& x, const State* v) {
  Binding b = params;
  for (std::size_t j = 0; j < x.size(); ++j) b[xname(j)] = x[j];
  if (v)
    for (std::size_t j = 0; j < v->size(); ++j) b[vname(j)] = (*v)[j];
  return b;
}

Expression dilation_defect(const SodeField& f, int i) {
  // sum_j (x_j dX_i/dx_j + v_j dX_i/dv_j) - X_i
  Expression acc = Expression::constant(0.0);
  for (int j = 0; j < f.n; ++j) {
    acc = acc + Expression::variable(xname(j)) * f.components[i].diff(xname(j));
    acc = acc + Expression::variable(vname(j)) * f.components[i].diff(vname(j));
  }
  return (acc - f.components[i]).simplified();
}

struct FieldSamples {
  std::vector<State> xs, vs;  // paired
  double scale = 1.0;         // max(1, max |X_i|)
};

FieldSamples probe_field(const SodeField& f) {
  FieldSamples s;
  const int k = f.n <= 2 ? 4 : 3;
  const auto xg = box_grid(f.domain, k, 64);
  const auto vg = box_grid(velocity_box(f.n), k, 64);
  for (const auto& x : xg) {
    for (const auto& v : vg) {
      s.xs.push_back(x);
      s.vs.push_back(v);
      for (int i = 0; i < f.n; ++i)
        s.scale = std::max(s.scale, std::fabs(f.component(i, x, v)));
    }
  }
  return s;
}

}  // namespace

SodeField::SodeField(int n_in, std::vector<Expression> components_in,
                     std::vector<Interval> domain_in, Binding params_in)
    : n(n_in),
      components(std::move(components_in)),
      domain(std::move(domain_in)),
      params(std::move(params_in)) {
  if (n < 1) throw DomainError("SodeField: n must be positive");
  if (static_cast<int>(components.size()) != n)
    throw DomainError("SodeField: expected " + std::to_string(n) +
                      " components");
  if (static_cast<int>(domain.size()) != n)
    throw DomainError("SodeField: expected " + std::to_string(n) +
                      " domain intervals");
  for (const auto& iv : domain)
    if (!(iv.lo < iv.hi)) throw DomainError("SodeField: empty domain interval");

  const auto allowed = field_variables(n, params, true);
  for (auto& c : components) {
    for (const auto& v : c.variables())
      if (!allowed.count(v))
        throw DomainError("SodeField: unknown variable `" + v + "`");
    if (n == 1) c = canonicalize_1d(c, true);
  }

  // evaluability probe over domain x velocity box
  for (const auto& x : box_grid(domain, 4, 256)) {
    for (const auto& v : box_grid(velocity_box(n), 2, 64)) {
      for (int i = 0; i < n; ++i) {
        const double val = component(i, x, v);
        if (!std::isfinite(val))
          throw DomainError("SodeField: component " + std::to_string(i + 1) +
                            " non-finite on the probe grid");
      }
    }
  }
}

SodeField SodeField::parse(int n, const std::vector<std::string>& components,
                           std::vector<Interval> domain, Binding params) {
  const auto allowed = field_variables(n, params, true);
  std::vector<Expression> exprs;
  exprs.reserve(components.size());
  for (const auto& text : components)
    exprs.push_back(parse_expression(text, allowed));
  return SodeField(n, std::move(exprs), std::move(domain), std::move(params));
}

double SodeField::component(int i, const State& x, const State& v) const {
  return components[i].eval(bind_state(params, x, &v));
}

OdeField SodeField::ode() const {
  const SodeField self = *this;
  return [self](double, const State& y, State& dy) {
    const int n = self.n;
    State x(y.begin(), y.begin() + n), v(y.begin() + n, y.end());
    dy.resize(2 * n);
    for (int i = 0; i < n; ++i) {
      dy[i] = v[i];
      dy[n + i] = self.component(i, x, v);
    }
  };
}

bool SodeField::inside(const State& x) const {
  for (int j = 0; j < n; ++j)
    if (x[j] <= domain[j].lo || x[j] >= domain[j].hi) return false;
  return true;
}

BasicFunction::BasicFunction(Expression f_in, int n_in,
                             std::vector<Interval> domain_in, Binding params_in)
    : f(std::move(f_in)),
      n(n_in),
      domain(std::move(domain_in)),
      params(std::move(params_in)) {
  if (n < 1) throw DomainError("BasicFunction: n must be positive");
  if (static_cast<int>(domain.size()) != n)
    throw DomainError("BasicFunction: expected " + std::to_string(n) +
                      " domain intervals");
  const auto allowed = field_variables(n, params, false);
  for (const auto& v : f.variables())
    if (!allowed.count(v))
      throw DomainError("BasicFunction: unknown variable `" + v + "`");
  if (n == 1) f = canonicalize_1d(f, false);

  int s = 0;
  for (const auto& x : box_grid(domain, 4)) {
    const double val = f.eval(bind_state(params, x, nullptr));
    if (!std::isfinite(val) || val == 0.0)
      throw DomainError("BasicFunction: vanishes or blows up on the domain");
    const int sv = val > 0 ? +1 : -1;
    if (s == 0)
      s = sv;
    else if (s != sv)
      throw DomainError("BasicFunction: sign changes on the domain");
  }
  sign = s;
}

BasicFunction BasicFunction::parse(const std::string& text, int n,
                                   std::vector<Interval> domain,
                                   Binding params) {
  const auto allowed = field_variables(n, params, false);
  return BasicFunction(parse_expression(text, allowed), n, std::move(domain),
                       std::move(params));
}

double BasicFunction::operator()(const State& x) const {
  return f.eval(bind_state(params, x, nullptr));
}

SodeField transform_system(const SodeField& field, const BasicFunction& f) {
  if (f.n != field.n)
    throw DomainError("transform_system: dimension mismatch");
  const Expression fe = f.f;
  std::vector<Expression> out;
  out.reserve(field.n);
  // the quadratic-in-velocity correction sum_j (1/f) df/dx_j v_j
  Expression drift = Expression::constant(0.0);
  for (int j = 0; j < field.n; ++j)
    drift = drift + fe.diff(xname(j)) * Expression::variable(vname(j));
  drift = (drift / fe).simplified();

  for (int i = 0; i < field.n; ++i) {
    Expression xi = field.components[i];
    for (int j = 0; j < field.n; ++j)
      xi = xi.substitute(vname(j), Expression::variable(vname(j)) / fe);
    Expression comp =
        fe * fe * xi + drift * Expression::variable(vname(i));
    out.push_back(comp.simplified());
  }
  Binding params = field.params;
  for (const auto& [k, v] : f.params) params[k] = v;
  return SodeField(field.n, std::move(out), field.domain, std::move(params));
}

LinearCheck check_linear(const SodeField& field) {
  LinearCheck res;
  const FieldSamples s = probe_field(field);
  const int n = field.n;

  // degree-1 homogeneity: the dilation defect must vanish
  double defect = 0.0;
  for (int i = 0; i < n; ++i) {
    const Expression d = dilation_defect(field, i);
    for (std::size_t k = 0; k < s.xs.size(); ++k) {
      Binding b = bind_state(field.params, s.xs[k], &s.vs[k]);
      defect = std::max(defect, std::fabs(d.eval(b)));
    }
  }
  res.residual = defect;
  if (defect > 1e-9 * s.scale) return res;

  // recover constant matrices by least squares, component by component
  res.A.assign(n, std::vector<double>(n, 0.0));
  res.B.assign(n, std::vector<double>(n, 0.0));
  double fit_resid = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (std::size_t k = 0; k < s.xs.size(); ++k) {
      std::vector<double> row;
      row.insert(row.end(), s.xs[k].begin(), s.xs[k].end());
      row.insert(row.end(), s.vs[k].begin(), s.vs[k].end());
      rows.push_back(std::move(row));
      rhs.push_back(field.component(i, s.xs[k], s.vs[k]));
    }
    const std::vector<double> c = lstsq(rows, rhs);
    for (int j = 0; j < n; ++j) {
      res.A[i][j] = c[j];
      res.B[i][j] = c[n + j];
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
      double pred = 0.0;
      for (std::size_t j = 0; j < rows[k].size(); ++j)
        pred += c[j] * rows[k][j];
      fit_resid = std::max(fit_resid, std::fabs(pred - rhs[k]));
    }
  }
  res.residual = std::max(defect, fit_resid);
  res.linear = fit_resid <= 1e-8 * s.scale;
  if (!res.linear) {
    res.A.clear();
    res.B.clear();
  }
  return res;
}

FibreLinearCheck check_fibre_linear(const SodeField& field) {
  FibreLinearCheck res;
  const FieldSamples s = probe_field(field);
  const int n = field.n;
  double defect = 0.0;
  for (int i = 0; i < n; ++i) {
    // sum_k v_k dX_i/dv_k - X_i
    Expression d = Expression::constant(0.0);
    for (int k = 0; k < n; ++k)
      d = d + Expression::variable(vname(k)) * field.components[i].diff(vname(k));
    d = (d - field.components[i]).simplified();
    for (std::size_t k = 0; k < s.xs.size(); ++k) {
      Binding b = bind_state(field.params, s.xs[k], &s.vs[k]);
      defect = std::max(defect, std::fabs(d.eval(b)));
    }
  }
  res.residual = defect;
  res.fibre_linear = defect <= 1e-9 * s.scale;
  if (res.fibre_linear) {
    res.A.assign(n, std::vector<Expression>(n, Expression::constant(0.0)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        res.A[i][j] = field.components[i].diff(vname(j)).simplified();
  }
  return res;
}

std::optional<InhomLinearCheck> check_inhomogeneous_linear(
    const SodeField& field) {
  const FieldSamples s = probe_field(field);
  const int n = field.n;

  // the vertical shift C_i = X_i - (dilation X)_i must be constant
  InhomLinearCheck res;
  res.C.assign(n, 0.0);
  double spread = 0.0;
  for (int i = 0; i < n; ++i) {
    const Expression c = (-dilation_defect(field, i)).simplified();
    double lo = 0, hi = 0, sum = 0;
    for (std::size_t k = 0; k < s.xs.size(); ++k) {
      Binding b = bind_state(field.params, s.xs[k], &s.vs[k]);
      const double v = c.eval(b);
      if (k == 0) lo = hi = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    spread = std::max(spread, hi - lo);
    res.C[i] = sum / s.xs.size();
  }
  if (spread > 1e-9 * s.scale) return std::nullopt;

  // the remainder must be linear
  std::vector<Expression> shifted;
  shifted.reserve(n);
  for (int i = 0; i < n; ++i)
    shifted.push_back(
        (field.components[i] - Expression::constant(res.C[i])).simplified());
  const SodeField remainder(n, std::move(shifted), field.domain, field.params);
  const LinearCheck lin = check_linear(remainder);
  if (!lin.linear) return std::nullopt;
  res.A = lin.A;
  res.B = lin.B;
  res.residual = std::max(spread, lin.residual);
  return res;
}

Expression hamel_symbol(const BasicFunction& f, int i, int j, int k) {
  if (i < 1 || i > f.n || j < 1 || j > f.n || k < 1 || k > f.n)
    throw DomainError("hamel_symbol: index out of range");
  const Expression fe = f.f;
  Expression num = Expression::constant(0.0);
  if (k == i) num = num + fe.diff(xname(j - 1));
  if (k == j) num = num - fe.diff(xname(i - 1));
  return (num / (fe * fe)).simplified();
}

namespace {

// degree-2 least-squares fit; accepted when the residual is small relative
// to the sampled magnitude
std::optional<std::array<double, 3>> quadratic_fit(
    const std::vector<std::pair<double, double>>& samples) {
  const PolyFit fit = fit_poly(samples, 2);
  double scale = 1.0;
  for (const auto& [x, y] : samples) scale = std::max(scale, std::fabs(y));
  if (fit.max_residual > 1e-8 * scale) return std::nullopt;
  return std::array<double, 3>{fit.coeff[0], fit.coeff[1], fit.coeff[2]};
}

}  // namespace

std::optional<EnergyReduction> energy_reduce(const NaturalSystem& sys,
                                             const ScalarFunction& f,
                                             bool fixed_energy) {
  const Interval dom = sys.potential.domain();
  std::vector<std::pair<double, double>> f2, f2v;
  for (int i = 0; i < 64; ++i) {
    const double q = dom.lo + (i + 0.5) * dom.length() / 64;
    double fv, Vv;
    try {
      fv = f(q);
      Vv = sys.potential(q);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (!(fv > 0.0))
      throw DomainError("energy_reduce: f must be positive on the domain");
    if (!std::isfinite(Vv)) return std::nullopt;
    f2.emplace_back(q, fv * fv);
    f2v.emplace_back(q, fv * fv * Vv);
  }

  EnergyReduction r;
  if (fixed_energy) {
    std::vector<std::pair<double, double>> lhs;
    lhs.reserve(f2.size());
    for (std::size_t i = 0; i < f2.size(); ++i)
      lhs.emplace_back(f2[i].first,
                       sys.energy * f2[i].second - f2v[i].second);
    const auto q = quadratic_fit(lhs);
    if (!q) return std::nullopt;
    r.A = (*q)[2];
    r.B = (*q)[1];
    r.C = (*q)[0];
    return r;
  }

  const auto qa = quadratic_fit(f2);
  const auto qp = quadratic_fit(f2v);
  if (!qa || !qp) return std::nullopt;
  r.c = (*qa)[0];
  r.b = (*qa)[1];
  r.a = (*qa)[2];
  r.p0 = (*qp)[0];
  r.p1 = (*qp)[1];
  r.p2 = (*qp)[2];
  r.A = r.a * sys.energy - r.p2;
  r.B = r.b * sys.energy - r.p1;
  r.C = r.c * sys.energy - r.p0;
  return r;
}

std::optional<EnergySolution> find_energy_f(const NaturalSystem& sys,
                                            std::vector<double> ansatz) {
  if (ansatz.empty()) throw DomainError("find_energy_f: empty ansatz");
  std::stable_sort(ansatz.begin(), ansatz.end(), [](double a, double b) {
    if (std::fabs(a) != std::fabs(b)) return std::fabs(a) < std::fabs(b);
    return a < b;
  });
  const std::string var = sys.potential.var();
  for (double p : ansatz) {
    const Expression fq =
        pow(Expression::variable(var), Expression::constant(p));
    ScalarFunction f(fq, var, sys.potential.domain(), sys.potential.params());
    try {
      const auto red = energy_reduce(sys, f);
      if (red) return EnergySolution{p, *red};
    } catch (const std::exception&) {
      continue;  // f not positive or not evaluable for this exponent
    }
  }
  return std::nullopt;
}

}  // namespace sundman
