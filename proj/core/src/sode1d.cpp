#include "sundman/sode1d.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace sundman {

namespace {

std::vector<double> probe_grid(Interval dom, int n) {
  std::vector<double> g(n);
  const double h = dom.length() / n;
  for (int i = 0; i < n; ++i) g[i] = dom.lo + (i + 0.5) * h;
  return g;
}

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

bool same_var_closed_forms(std::initializer_list<const RealFn*> fns) {
  std::string var;
  for (const RealFn* f : fns) {
    if (!f->closed_form) return false;
    if (var.empty())
      var = f->var;
    else if (f->var != var)
      return false;
  }
  return true;
}

Binding merged_params(std::initializer_list<const RealFn*> fns) {
  Binding b;
  for (const RealFn* f : fns)
    for (const auto& [k, v] : f->params) b[k] = v;
  return b;
}

}  // namespace

QuadraticSode::QuadraticSode(RealFn gamma_in, RealFn A_in, RealFn b_in,
                             Interval domain_in)
    : gamma(std::move(gamma_in)),
      A(std::move(A_in)),
      b(std::move(b_in)),
      domain(domain_in) {
  if (!(domain.lo < domain.hi)) throw DomainError("QuadraticSode: empty domain");
  const char* names[3] = {"gamma", "A", "b"};
  const RealFn* fns[3] = {&gamma, &A, &b};
  for (double x : probe_grid(domain, 64)) {
    for (int i = 0; i < 3; ++i) {
      double v;
      try {
        v = (*fns[i])(x);
      } catch (const std::exception& e) {
        throw DomainError(std::string("QuadraticSode: coefficient ") +
                          names[i] + " fails at x=" + std::to_string(x) +
                          ": " + e.what());
      }
      if (!std::isfinite(v))
        throw DomainError(std::string("QuadraticSode: coefficient ") +
                          names[i] + " non-finite at x=" + std::to_string(x));
    }
  }
}

QuadraticSode QuadraticSode::from_scalar(const ScalarFunction& gamma,
                                         const ScalarFunction& A,
                                         const ScalarFunction& b,
                                         Interval domain) {
  return QuadraticSode(RealFn::from_scalar(gamma), RealFn::from_scalar(A),
                       RealFn::from_scalar(b), domain);
}

double QuadraticSode::rhs(double x, double v) const {
  return -gamma(x) * v * v - A(x) * v - b(x);
}

GenSundman::GenSundman(RealFn h_in, RealFn phi_in, Interval domain_in,
                       bool require_monotone)
    : h(std::move(h_in)), phi(std::move(phi_in)), domain(domain_in) {
  if (!(domain.lo < domain.hi)) throw DomainError("GenSundman: empty domain");
  const auto grid = probe_grid(domain, 64);
  double slope_sign = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double hv = h(grid[i]);
    if (!(hv > 0.0))
      throw DomainError("GenSundman: h not positive at x=" +
                        std::to_string(grid[i]));
    double dphi;
    if (phi.has_d1()) {
      dphi = phi.d1(grid[i]);
    } else if (i + 1 < grid.size()) {
      dphi = phi(grid[i + 1]) - phi(grid[i]);
    } else {
      continue;
    }
    if (dphi == 0.0 && require_monotone)
      throw DomainError("GenSundman: phi not strictly monotone at x=" +
                        std::to_string(grid[i]));
    if (slope_sign == 0.0) {
      slope_sign = sgn(dphi);
    } else if (dphi != 0.0 && sgn(dphi) != slope_sign) {
      if (require_monotone)
        throw DomainError("GenSundman: phi' changes sign on domain");
      monotone = false;
    }
  }
}

GenSundman GenSundman::identity(Interval domain) {
  return GenSundman(RealFn::constant(1.0, domain), RealFn::identity(domain),
                    domain);
}

namespace {

// Numeric inverse of a monotone RealFn, with endpoint clamping to absorb
// roundoff at the range boundary.
Fn1 numeric_inverse(const RealFn& phi, Interval dom) {
  const double ya = phi(dom.lo), yb = phi(dom.hi);
  const double ylo = std::min(ya, yb), yhi = std::max(ya, yb);
  Fn1 phif = phi.f;
  return [phif, dom, ylo, yhi](double y) {
    const double pad = 1e-12 * std::max(1.0, std::max(std::fabs(ylo), std::fabs(yhi)));
    y = std::clamp(y, ylo + 0.0, yhi - 0.0);
    (void)pad;
    return invert_monotone(phif, y, dom, 1e-13);
  };
}

}  // namespace

GenSundman compose(const GenSundman& t2, const GenSundman& t1) {
  // restrict t1's domain so that phi1(x) lands inside t2's domain
  const double ya = t1.phi(t1.domain.lo), yb = t1.phi(t1.domain.hi);
  const bool increasing = yb > ya;
  const double rlo = std::min(ya, yb), rhi = std::max(ya, yb);
  const double pad = 1e-9 * std::max(1.0, std::fabs(t2.domain.length()));
  const double wlo = std::max(rlo, t2.domain.lo - pad);
  const double whi = std::min(rhi, t2.domain.hi + pad);
  if (!(wlo < whi))
    throw DomainError("compose: range of phi1 misses the domain of t2");
  Interval dom = t1.domain;
  if (wlo > rlo || whi < rhi) {
    const Fn1 inv = numeric_inverse(t1.phi, t1.domain);
    const double a = inv(wlo), b = inv(whi);
    dom = increasing ? Interval{a, b} : Interval{b, a};
  }

  const RealFn h1 = t1.h, h2 = t2.h, p1 = t1.phi, p2 = t2.phi;
  RealFn H;
  H.domain = dom;
  H.f = [h1, h2, p1](double x) { return h2(p1(x)) * h1(x); };
  if (h1.has_d1() && h2.has_d1() && p1.has_d1()) {
    H.df = [h1, h2, p1](double x) {
      return h2.d1(p1(x)) * p1.d1(x) * h1(x) + h2(p1(x)) * h1.d1(x);
    };
  }
  if (h1.has_d2() && h2.has_d2() && p1.has_d2()) {
    H.d2f = [h1, h2, p1](double x) {
      const double y = p1(x), j = p1.d1(x), jj = p1.d2(x);
      return (h2.d2(y) * j * j + h2.d1(y) * jj) * h1(x) +
             2.0 * h2.d1(y) * j * h1.d1(x) + h2(y) * h1.d2(x);
    };
  }

  RealFn Phi;
  Phi.domain = dom;
  Phi.f = [p1, p2](double x) { return p2(p1(x)); };
  if (p1.has_d1() && p2.has_d1())
    Phi.df = [p1, p2](double x) { return p2.d1(p1(x)) * p1.d1(x); };
  if (p1.has_d2() && p2.has_d2())
    Phi.d2f = [p1, p2](double x) {
      const double y = p1(x), j = p1.d1(x);
      return p2.d2(y) * j * j + p2.d1(y) * p1.d2(x);
    };
  if (p1.has_d3() && p2.has_d3())
    Phi.d3f = [p1, p2](double x) {
      const double y = p1(x), j = p1.d1(x), jj = p1.d2(x), jjj = p1.d3(x);
      return p2.d3(y) * j * j * j + 3.0 * p2.d2(y) * j * jj + p2.d1(y) * jjj;
    };
  return GenSundman(std::move(H), std::move(Phi), dom);
}

GenSundman inverse(const GenSundman& t) {
  if (!t.monotone)
    throw DomainError("inverse: phi is not monotone on the domain");
  const double ya = t.phi(t.domain.lo), yb = t.phi(t.domain.hi);
  const Interval dom{std::min(ya, yb), std::max(ya, yb)};
  const Fn1 psi = numeric_inverse(t.phi, t.domain);
  const RealFn h = t.h, phi = t.phi;

  RealFn Psi;
  Psi.domain = dom;
  Psi.f = psi;
  if (phi.has_d1())
    Psi.df = [psi, phi](double y) { return 1.0 / phi.d1(psi(y)); };
  if (phi.has_d2())
    Psi.d2f = [psi, phi](double y) {
      const double x = psi(y), j = phi.d1(x);
      return -phi.d2(x) / (j * j * j);
    };
  if (phi.has_d3())
    Psi.d3f = [psi, phi](double y) {
      const double x = psi(y), j = phi.d1(x), jj = phi.d2(x);
      return (3.0 * jj * jj - j * phi.d3(x)) / std::pow(j, 5);
    };

  RealFn Hinv;
  Hinv.domain = dom;
  Hinv.f = [psi, h](double y) { return 1.0 / h(psi(y)); };
  if (h.has_d1() && phi.has_d1())
    Hinv.df = [psi, h, phi](double y) {
      const double x = psi(y), hv = h(x);
      return -h.d1(x) / (hv * hv * phi.d1(x));
    };
  return GenSundman(std::move(Hinv), std::move(Psi), dom);
}

Factorization factorize(const GenSundman& t, FactorOrder order) {
  GenSundman coord(RealFn::constant(1.0, t.domain), t.phi, t.domain);
  if (order == FactorOrder::SundmanThenCoordinate) {
    GenSundman sund(t.h, RealFn::identity(t.domain), t.domain);
    return {std::move(coord), std::move(sund), order};
  }
  // (h o phi^-1, id) * (1, phi)
  if (!t.monotone)
    throw DomainError("factorize: phi is not monotone on the domain");
  const double ya = t.phi(t.domain.lo), yb = t.phi(t.domain.hi);
  const Interval idom{std::min(ya, yb), std::max(ya, yb)};
  const Fn1 psi = numeric_inverse(t.phi, t.domain);
  const RealFn h = t.h, phi = t.phi;
  RealFn Hbar;
  Hbar.domain = idom;
  Hbar.f = [psi, h](double y) { return h(psi(y)); };
  if (h.has_d1() && phi.has_d1())
    Hbar.df = [psi, h, phi](double y) {
      const double x = psi(y);
      return h.d1(x) / phi.d1(x);
    };
  GenSundman sund(std::move(Hbar), RealFn::identity(idom), idom);
  return {std::move(coord), std::move(sund), order};
}

std::pair<double, double> map_state(const GenSundman& t, double x, double v) {
  if (x < t.domain.lo || x > t.domain.hi)
    throw DomainError("map_state: x outside transformation domain");
  return {t.phi(x), t.phi.d1(x) * v / t.h(x)};
}

RealFn p_invariant(const QuadraticSode& s) {
  const RealFn g = s.gamma, A = s.A, b = s.b;
  RealFn p;
  p.domain = s.domain;
  p.f = [g, A, b](double x) {
    return A(x) * b.d1(x) + g(x) * A(x) * b(x) - A.d1(x) * b(x);
  };
  if (same_var_closed_forms({&g, &A, &b})) {
    const std::string& var = g.var;
    const Expression ge = *g.closed_form, Ae = *A.closed_form,
                     be = *b.closed_form;
    p.closed_form =
        (Ae * be.diff(var) + ge * Ae * be - Ae.diff(var) * be).simplified();
    p.var = var;
    p.params = merged_params({&g, &A, &b});
  }
  return p;
}

RealFn q_invariant(const QuadraticSode& s) {
  const RealFn g = s.gamma, A = s.A, b = s.b;
  RealFn q;
  q.domain = s.domain;
  q.f = [g, A, b](double x) {
    const double gv = g(x), Av = A(x), bv = b(x);
    const double A1 = A.d1(x), b1 = b.d1(x);
    const double P = Av * b1 + gv * Av * bv - A1 * bv;
    // the A'b' cross terms of (A b')' and (-A' b)' cancel
    const double Pp = Av * b.d2(x) + g.d1(x) * Av * bv + gv * A1 * bv +
                      gv * Av * b1 - A.d2(x) * bv;
    return Av * Pp - 3.0 * A1 * P;
  };
  if (same_var_closed_forms({&g, &A, &b})) {
    const std::string& var = g.var;
    const Expression ge = *g.closed_form, Ae = *A.closed_form,
                     be = *b.closed_form;
    const Expression P =
        (Ae * be.diff(var) + ge * Ae * be - Ae.diff(var) * be).simplified();
    const Expression Q =
        (Ae * P.diff(var) - Expression::constant(3.0) * Ae.diff(var) * P)
            .simplified();
    q.closed_form = Q;
    q.var = var;
    q.params = merged_params({&g, &A, &b});
  }
  return q;
}

QuadraticSode apply_pure_sundman(const QuadraticSode& s, const RealFn& h) {
  for (double x : probe_grid(s.domain, 64))
    if (h(x) == 0.0)
      throw DomainError("apply_pure_sundman: h vanishes at x=" +
                        std::to_string(x));

  if (same_var_closed_forms({&s.gamma, &s.A, &s.b, &h})) {
    const std::string& var = h.var;
    const Expression he = *h.closed_form;
    const Expression g1 = *s.gamma.closed_form + he.diff(var) / he;
    const Expression A1 = *s.A.closed_form / he;
    const Expression b1 = *s.b.closed_form / (he * he);
    const Binding p = merged_params({&s.gamma, &s.A, &s.b, &h});
    return QuadraticSode(
        RealFn::from_expression(g1.simplified(), var, s.domain, p),
        RealFn::from_expression(A1.simplified(), var, s.domain, p),
        RealFn::from_expression(b1.simplified(), var, s.domain, p), s.domain);
  }

  const RealFn g = s.gamma, A = s.A, b = s.b;
  RealFn g1, A1, b1;
  g1.domain = A1.domain = b1.domain = s.domain;
  g1.f = [g, h](double x) { return g(x) + h.d1(x) / h(x); };
  if (g.has_d1() && h.has_d2())
    g1.df = [g, h](double x) {
      const double hv = h(x), h1 = h.d1(x);
      return g.d1(x) + (h.d2(x) * hv - h1 * h1) / (hv * hv);
    };
  if (g.has_d2() && h.has_d3())
    g1.d2f = [g, h](double x) {
      const double hv = h(x), h1 = h.d1(x), h2 = h.d2(x);
      return g.d2(x) +
             (h.d3(x) * hv * hv - 3.0 * h1 * h2 * hv + 2.0 * h1 * h1 * h1) /
                 (hv * hv * hv);
    };
  A1.f = [A, h](double x) { return A(x) / h(x); };
  if (A.has_d1() && h.has_d1())
    A1.df = [A, h](double x) {
      const double hv = h(x);
      return (A.d1(x) * hv - A(x) * h.d1(x)) / (hv * hv);
    };
  if (A.has_d2() && h.has_d2())
    A1.d2f = [A, h](double x) {
      const double hv = h(x), h1 = h.d1(x), h2 = h.d2(x);
      return A.d2(x) / hv - 2.0 * A.d1(x) * h1 / (hv * hv) -
             A(x) * h2 / (hv * hv) + 2.0 * A(x) * h1 * h1 / (hv * hv * hv);
    };
  b1.f = [b, h](double x) {
    const double hv = h(x);
    return b(x) / (hv * hv);
  };
  if (b.has_d1() && h.has_d1())
    b1.df = [b, h](double x) {
      const double hv = h(x);
      return b.d1(x) / (hv * hv) - 2.0 * b(x) * h.d1(x) / (hv * hv * hv);
    };
  if (b.has_d2() && h.has_d2())
    b1.d2f = [b, h](double x) {
      const double hv = h(x), h1 = h.d1(x), h2 = h.d2(x);
      return b.d2(x) / (hv * hv) - 4.0 * b.d1(x) * h1 / (hv * hv * hv) -
             2.0 * b(x) * h2 / (hv * hv * hv) +
             6.0 * b(x) * h1 * h1 / (hv * hv * hv * hv);
    };
  return QuadraticSode(std::move(g1), std::move(A1), std::move(b1), s.domain);
}

QuadraticSode apply_coordinate_change(const QuadraticSode& s,
                                      const RealFn& phi) {
  if (!phi.has_d1() || !phi.has_d2())
    throw DomainError("apply_coordinate_change: phi needs two derivatives");
  const double ya = phi(s.domain.lo), yb = phi(s.domain.hi);
  if (ya == yb)
    throw DomainError("apply_coordinate_change: phi is not monotone");
  const Interval newdom{std::min(ya, yb), std::max(ya, yb)};
  RealFn phicopy = phi;
  phicopy.domain = s.domain;
  const Fn1 psi =
      numeric_inverse(phicopy, s.domain);
  const RealFn g = s.gamma, A = s.A, b = s.b, p = phi;

  RealFn Abar, bbar, gbar;
  Abar.domain = bbar.domain = gbar.domain = newdom;

  Abar.f = [psi, A](double y) { return A(psi(y)); };
  if (A.has_d1())
    Abar.df = [psi, A, p](double y) {
      const double x = psi(y);
      return A.d1(x) / p.d1(x);
    };
  if (A.has_d2())
    Abar.d2f = [psi, A, p](double y) {
      const double x = psi(y), J = p.d1(x);
      return (A.d2(x) * J - A.d1(x) * p.d2(x)) / (J * J * J);
    };

  bbar.f = [psi, b, p](double y) {
    const double x = psi(y);
    return p.d1(x) * b(x);
  };
  if (b.has_d1())
    bbar.df = [psi, b, p](double y) {
      const double x = psi(y), J = p.d1(x);
      return b.d1(x) + p.d2(x) * b(x) / J;
    };
  if (b.has_d2() && p.has_d3())
    bbar.d2f = [psi, b, p](double y) {
      const double x = psi(y), J = p.d1(x), Jp = p.d2(x), Jpp = p.d3(x);
      return (b.d2(x) + (Jpp * J - Jp * Jp) / (J * J) * b(x) +
              Jp / J * b.d1(x)) /
             J;
    };

  gbar.f = [psi, g, p](double y) {
    const double x = psi(y), J = p.d1(x);
    return (g(x) - p.d2(x) / J) / J;
  };
  if (g.has_d1() && p.has_d3())
    gbar.df = [psi, g, p](double y) {
      const double x = psi(y), J = p.d1(x), Jp = p.d2(x), Jpp = p.d3(x);
      return (g.d1(x) - (Jpp * J - Jp * Jp) / (J * J) -
              (g(x) - Jp / J) * Jp / J) /
             (J * J);
    };

  return QuadraticSode(std::move(gbar), std::move(Abar), std::move(bbar),
                       newdom);
}

QuadraticSode apply(const GenSundman& t, const QuadraticSode& s) {
  return apply_coordinate_change(apply_pure_sundman(s, t.h), t.phi);
}

std::variant<QuadraticSode, NotQuadratic> normalize(const Expression& X,
                                                    Interval domain,
                                                    Binding params) {
  const Expression Xv = X.diff("v").simplified();
  const Expression Xvv = Xv.diff("v").simplified();
  const Expression Xvvv = Xvv.diff("v").simplified();

  const auto xs = probe_grid(domain, 16);
  const auto vs = probe_grid(Interval{-2.0, 2.0}, 16);
  double scale = 1.0, cubic_max = 0.0;
  for (double x : xs) {
    for (double v : vs) {
      Binding bd = params;
      bd["x"] = x;
      bd["v"] = v;
      scale = std::max(scale, std::fabs(X.eval(bd)));
      cubic_max = std::max(cubic_max, std::fabs(Xvvv.eval(bd)));
    }
  }
  if (cubic_max > 1e-10 * scale)
    return NotQuadratic{"X is not polynomial of degree <= 2 in the velocity "
                        "(max |d^3X/dv^3| = " +
                        std::to_string(cubic_max) + ")"};

  const Expression zero = Expression::constant(0.0);
  const Expression b_e = (-X).substitute("v", zero).simplified();
  const Expression A_e = (-Xv).substitute("v", zero).simplified();
  const Expression g_e =
      (Expression::constant(-0.5) * Xvv).substitute("v", zero).simplified();

  // reconstruction check at the sampled points
  for (double x : xs) {
    for (double v : vs) {
      Binding bd = params;
      bd["x"] = x;
      bd["v"] = v;
      const double lhs = X.eval(bd);
      const double rhs =
          -g_e.eval(bd) * v * v - A_e.eval(bd) * v - b_e.eval(bd);
      if (std::fabs(lhs - rhs) > 1e-9 * scale)
        return NotQuadratic{"coefficient extraction mismatch at (x,v)=(" +
                            std::to_string(x) + "," + std::to_string(v) + ")"};
    }
  }
  return QuadraticSode(RealFn::from_expression(g_e, "x", domain, params),
                       RealFn::from_expression(A_e, "x", domain, params),
                       RealFn::from_expression(b_e, "x", domain, params),
                       domain);
}

const char* to_string(LinCase c) {
  switch (c) {
    case LinCase::NotQuadratic: return "not-quadratic";
    case LinCase::FreeParticle: return "free-particle";
    case LinCase::UnitForcing: return "unit-forcing";
    case LinCase::Linear: return "linear";
    case LinCase::NotLinearisable: return "not-linearisable";
  }
  return "?";
}

namespace {

struct SignScan {
  bool constant = true;
  double change_lo = 0.0, change_hi = 0.0;  // bracketing subinterval
};

SignScan scan_sign(const std::vector<double>& grid,
                   const std::vector<double>& vals) {
  SignScan s;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (sgn(vals[i]) != 0.0 && sgn(vals[i + 1]) != 0.0 &&
        sgn(vals[i]) != sgn(vals[i + 1])) {
      s.constant = false;
      s.change_lo = grid[i];
      s.change_hi = grid[i + 1];
      return s;
    }
  }
  return s;
}

Interval constant_sign_interval(const std::vector<double>& grid,
                                const std::vector<double>& vals, double x0,
                                Interval dom) {
  // the maximal subinterval around x0 on which the sampled sign is constant
  std::size_t i0 = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::fabs(grid[i] - x0) < std::fabs(grid[i0] - x0)) i0 = i;
  const double s0 = sgn(vals[i0]);
  double lo = dom.lo, hi = dom.hi;
  for (std::size_t i = i0; i-- > 0;) {
    if (sgn(vals[i]) != s0) {
      lo = 0.5 * (grid[i] + grid[i + 1]);
      break;
    }
  }
  for (std::size_t i = i0 + 1; i < grid.size(); ++i) {
    if (sgn(vals[i]) != s0) {
      hi = 0.5 * (grid[i - 1] + grid[i]);
      break;
    }
  }
  return {lo, hi};
}

}  // namespace

LinearisationOutcome linearize(const QuadraticSode& s,
                               const LinearizeConfig& cfg) {
  const Interval dom = s.domain;
  const int n = std::max(16, cfg.grid_n);
  const auto grid = probe_grid(dom, n);
  const double x0 = cfg.base_point.value_or(dom.mid());
  if (x0 < dom.lo || x0 > dom.hi)
    throw DomainError("linearize: base point outside domain");

  std::vector<double> gv(n), Av(n), bv(n);
  double supG = 0, supA = 0, supB = 0;
  for (int i = 0; i < n; ++i) {
    gv[i] = s.gamma(grid[i]);
    Av[i] = s.A(grid[i]);
    bv[i] = s.b(grid[i]);
    supG = std::max(supG, std::fabs(gv[i]));
    supA = std::max(supA, std::fabs(Av[i]));
    supB = std::max(supB, std::fabs(bv[i]));
  }
  const double scale0 = std::max({1.0, supG, supA, supB});
  const bool A_zero = supA <= cfg.zero_tol * scale0;
  const bool b_zero = supB <= cfg.zero_tol * scale0;

  LinearisationOutcome out;
  out.base_point = x0;
  out.scale_K = 1.0;

  // antiderivative of gamma, anchored at the base point
  auto G = std::make_shared<NumericFunction>(s.gamma.f, x0, dom, cfg.quad_tol);
  const RealFn g = s.gamma, A = s.A, b = s.b;

  if (A_zero && b_zero) {
    // ST1: y = x, dtau = exp(-int gamma) dt
    RealFn h;
    h.domain = dom;
    h.f = [G](double x) { return std::exp(-(*G)(x)); };
    h.df = [G, g](double x) { return -g(x) * std::exp(-(*G)(x)); };
    if (g.has_d1())
      h.d2f = [G, g](double x) {
        const double gx = g(x);
        return (gx * gx - g.d1(x)) * std::exp(-(*G)(x));
      };
    if (g.has_d2())
      h.d3f = [G, g](double x) {
        const double gx = g(x);
        return (-g.d2(x) + 3.0 * gx * g.d1(x) - gx * gx * gx) *
               std::exp(-(*G)(x));
      };
    out.kind = LinCase::FreeParticle;
    out.transform = GenSundman(std::move(h), RealFn::identity(dom), dom);
    return out;
  }

  if (A_zero) {
    // ST2 (signed variant): y = int b exp(2 int gamma), dtau = |b| exp(int gamma) dt
    const auto bsign = scan_sign(grid, bv);
    if (!bsign.constant) {
      if (cfg.strict_b_sign)
        throw SignChangeError("b", bsign.change_lo, bsign.change_hi);
      if (cfg.split_on_sign_change) {
        const Interval sub = constant_sign_interval(grid, bv, x0, dom);
        QuadraticSode restricted(s.gamma, s.A, s.b, sub);
        LinearizeConfig sub_cfg = cfg;
        sub_cfg.split_on_sign_change = false;
        LinearisationOutcome r = linearize(restricted, sub_cfg);
        r.note += "domain restricted to the constant-sign interval (" +
                  std::to_string(sub.lo) + ", " + std::to_string(sub.hi) +
                  ") around the base point; ";
        return r;
      }
      out.note +=
          "b changes sign on the domain; the signed transform still targets "
          "y''+1=0 but degenerates where b vanishes; ";
    }
    auto phi_integrand = [G, b](double x) {
      return b(x) * std::exp(2.0 * (*G)(x));
    };
    auto Phi = std::make_shared<NumericFunction>(phi_integrand, x0, dom,
                                                 cfg.quad_tol);
    RealFn h;
    h.domain = dom;
    h.f = [G, b](double x) { return std::fabs(b(x)) * std::exp((*G)(x)); };
    if (b.has_d1())
      h.df = [G, g, b](double x) {
        return sgn(b(x)) * (b.d1(x) + g(x) * b(x)) * std::exp((*G)(x));
      };
    if (b.has_d2() && g.has_d1())
      h.d2f = [G, g, b](double x) {
        const double gx = g(x);
        return sgn(b(x)) *
               (b.d2(x) + 2.0 * gx * b.d1(x) + (g.d1(x) + gx * gx) * b(x)) *
               std::exp((*G)(x));
      };
    RealFn phi;
    phi.domain = dom;
    phi.f = [Phi](double x) { return (*Phi)(x); };
    phi.df = [G, b](double x) { return b(x) * std::exp(2.0 * (*G)(x)); };
    if (b.has_d1())
      phi.d2f = [G, g, b](double x) {
        return (b.d1(x) + 2.0 * g(x) * b(x)) * std::exp(2.0 * (*G)(x));
      };
    if (b.has_d2() && g.has_d1())
      phi.d3f = [G, g, b](double x) {
        const double gx = g(x);
        return (b.d2(x) + 4.0 * gx * b.d1(x) +
                (2.0 * g.d1(x) + 4.0 * gx * gx) * b(x)) *
               std::exp(2.0 * (*G)(x));
      };
    out.kind = LinCase::UnitForcing;
    out.alpha = 0.0;
    out.B = 0.0;
    out.C = 1.0;
    out.transform =
        GenSundman(std::move(h), std::move(phi), dom, bsign.constant);
    return out;
  }

  // A != 0 branch
  const auto Asign = scan_sign(grid, Av);
  if (!Asign.constant) {
    if (cfg.split_on_sign_change) {
      const Interval sub = constant_sign_interval(grid, Av, x0, dom);
      QuadraticSode restricted(s.gamma, s.A, s.b, sub);
      LinearizeConfig sub_cfg = cfg;
      sub_cfg.split_on_sign_change = false;
      LinearisationOutcome r = linearize(restricted, sub_cfg);
      r.note += "domain restricted to the constant-sign interval (" +
                std::to_string(sub.lo) + ", " + std::to_string(sub.hi) +
                ") of A around the base point; ";
      return r;
    }
    throw SignChangeError("A", Asign.change_lo, Asign.change_hi);
  }

  const RealFn q = q_invariant(s);
  double q_max = 0.0;
  double sA = 0.0, sB = 0.0, sG = 1.0;
  out.q_samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid[i];
    const double qx = q(x);
    out.q_samples.emplace_back(x, qx);
    q_max = std::max(q_max, std::fabs(qx));
    sA = std::max(sA, std::fabs(Av[i]) + std::fabs(A.d1(x)));
    sB = std::max(sB, std::fabs(bv[i]) + std::fabs(b.d1(x)) +
                          (b.has_d2() ? std::fabs(b.d2(x)) : 0.0));
    sG = std::max(sG, 1.0 + std::fabs(gv[i]));
  }
  out.q_max = q_max;
  out.q_scale = std::max(1.0, sA * sA * sB * sG);

  if (q_max > cfg.q_tol * out.q_scale) {
    out.kind = LinCase::NotLinearisable;
    return out;
  }

  // ST3: y = int A exp(int gamma), dtau = |A| dt
  const double alpha = sgn(Av[n / 2]);
  auto phi_integrand = [G, A](double x) { return A(x) * std::exp((*G)(x)); };
  auto Phi =
      std::make_shared<NumericFunction>(phi_integrand, x0, dom, cfg.quad_tol);
  RealFn h;
  h.domain = dom;
  h.f = [A](double x) { return std::fabs(A(x)); };
  if (A.has_d1()) h.df = [A](double x) { return sgn(A(x)) * A.d1(x); };
  if (A.has_d2()) h.d2f = [A](double x) { return sgn(A(x)) * A.d2(x); };
  RealFn phi;
  phi.domain = dom;
  phi.f = [Phi](double x) { return (*Phi)(x); };
  phi.df = [G, A](double x) { return A(x) * std::exp((*G)(x)); };
  if (A.has_d1())
    phi.d2f = [G, g, A](double x) {
      return (A.d1(x) + g(x) * A(x)) * std::exp((*G)(x));
    };
  if (A.has_d2() && g.has_d1())
    phi.d3f = [G, g, A](double x) {
      const double gx = g(x);
      return (A.d2(x) + 2.0 * gx * A.d1(x) + (g.d1(x) + gx * gx) * A(x)) *
             std::exp((*G)(x));
    };

  // b2(x2) = b exp(int gamma)/A must be affine in x2 = phi(x)
  std::vector<std::pair<double, double>> b2_samples;
  b2_samples.reserve(n);
  double b2sup = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = grid[i];
    const double b2 = bv[i] * std::exp((*G)(x)) / Av[i];
    b2_samples.emplace_back(phi(x), b2);
    b2sup = std::max(b2sup, std::fabs(b2));
  }
  const AffineFit fit = fit_affine(b2_samples);
  if (fit.max_residual > cfg.affine_tol * std::max(1.0, b2sup))
    throw DiagnosticsError(
        "linearize: Q vanishes on the grid but b2 is not affine in the new "
        "coordinate (residual " +
        std::to_string(fit.max_residual) +
        "); the symbolic and numeric criteria disagree");

  out.kind = LinCase::Linear;
  out.alpha = alpha;
  out.B = fit.slope;
  out.C = fit.intercept;
  out.transform = GenSundman(std::move(h), std::move(phi), dom);
  return out;
}

}  // namespace sundman
