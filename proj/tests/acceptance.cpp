// End-to-end acceptance checks. Each numbered criterion prints exactly one
// PASS/FAIL line; the process exits nonzero when any of them fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "sundman/json_io.hpp"
#include "sundman/verify.hpp"

using namespace sundman;

namespace {

int g_failures = 0;

void report(int id, const std::string& desc, bool ok,
            const std::string& detail) {
  std::cout << "ACCEPTANCE " << id << ": " << (ok ? "PASS" : "FAIL") << " — "
            << desc;
  if (!ok && !detail.empty()) std::cout << " [" << detail << "]";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

void criterion(int id, const std::string& desc,
               const std::function<void(std::ostringstream&)>& body) {
  std::ostringstream why;
  bool ok = false;
  try {
    body(why);
    ok = why.str().empty();
  } catch (const std::exception& e) {
    why << "exception: " << e.what();
  }
  report(id, desc, ok, why.str());
}

QuadraticSode make_sode(const std::string& g, const std::string& A,
                        const std::string& b, Interval dom,
                        Binding params = {}) {
  return QuadraticSode::from_scalar(
      ScalarFunction::parse(g, "x", dom, params),
      ScalarFunction::parse(A, "x", dom, params),
      ScalarFunction::parse(b, "x", dom, params), dom);
}

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

// max over 64 interior samples of |fn(x) - want(x)| / max(1, |want(x)|)
double max_rel_dev(const std::function<double(double)>& fn,
                   const std::function<double(double)>& want, Interval dom,
                   int n = 64) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = dom.lo + (i + 0.5) * dom.length() / n;
    worst = std::max(worst, rel_err(fn(x), want(x)));
  }
  return worst;
}

// max deviation of fn from its value at the first sample (constancy check)
double max_const_dev(const std::function<double(double)>& fn, Interval dom,
                     int n = 64) {
  const double ref = fn(dom.lo + 0.5 * dom.length() / n);
  double worst = 0.0;
  for (int i = 1; i < n; ++i)
    worst = std::max(worst,
                     std::fabs(fn(dom.lo + (i + 0.5) * dom.length() / n) - ref));
  return worst;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void crit1_inverse_cube(std::ostringstream& why) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const Interval dom{0.3, 3.0};
  const QuadraticSode s =
      make_sode("2/x", "0", "omega^2/x^3", dom, {{"omega", 1.0}});
  LinearizeConfig cfg;
  cfg.base_point = 1.0;
  const LinearisationOutcome o = linearize(s, cfg);
  if (o.kind != LinCase::UnitForcing) {
    why << "case " << to_string(o.kind);
    return;
  }
  const GenSundman& t = *o.transform;
  const double hdev =
      max_rel_dev([&](double x) { return t.h(x) * x; },
                  [](double) { return 1.0; }, dom);
  if (hdev > 1e-9) why << "h(x) x vs omega^2 deviates by " << hdev << "; ";
  const double pdev = max_const_dev(
      [&](double x) { return t.phi.d1(x) / x; }, dom);
  if (pdev > 1e-8) why << "phi'(x)/(omega^2 x) varies by " << pdev << "; ";
  const CorrespondenceReport r =
      verify_linearisation(s, o, 1.0, 0.0, 0.8, 1e-10, 1e-6);
  if (!r.pass) why << "verify failed at " << r.max_state_error << "; ";
  const double secs =
      std::chrono::duration<double>(clock::now() - start).count();
  if (secs >= 2.0) why << "runtime " << secs << " s";
}

void crit2_sphere(std::ostringstream& why) {
  const double pi = 3.14159265358979323846;
  const Interval dom{0.3, pi - 0.3};
  const QuadraticSode s =
      make_sode("-2*cot(x)", "0", "-sin(x)*cos(x)", dom);
  LinearizeConfig cfg;
  cfg.base_point = pi / 2;
  const LinearisationOutcome o = linearize(s, cfg);
  if (o.kind != LinCase::UnitForcing) {
    why << "case " << to_string(o.kind);
    return;
  }
  const GenSundman& t = *o.transform;
  const double hdev = max_rel_dev(
      [&](double x) { return t.h(x); },
      [](double x) { return std::fabs(std::cos(x) / std::sin(x)); }, dom);
  if (hdev > 1e-8) why << "h vs |cot x| deviates by " << hdev << "; ";
  const double pdev = max_const_dev(
      [&](double x) {
        return t.phi(x) - 1.0 / (2.0 * std::sin(x) * std::sin(x));
      },
      dom);
  if (pdev > 1e-7) why << "phi - 1/(2 sin^2 x) varies by " << pdev << "; ";
  const CorrespondenceReport r =
      verify_linearisation(s, o, 1.0, 0.0, 1.2, 1e-10, 1e-6);
  if (!r.pass) why << "verify failed at " << r.max_state_error;
}

void crit3_general_linear(std::ostringstream& why) {
  const Interval dom{0.5, 3.0};
  const QuadraticSode s = make_sode("1/x", "x", "1/2", dom);
  LinearizeConfig cfg;
  cfg.base_point = 1.0;
  const LinearisationOutcome o = linearize(s, cfg);
  if (o.kind != LinCase::Linear) {
    why << "case " << to_string(o.kind);
    return;
  }
  if (rel_err(o.alpha, 1.0) > 1e-8) why << "alpha = " << o.alpha << "; ";
  if (std::fabs(o.B) > 1e-8) why << "B = " << o.B << "; ";
  if (std::fabs(o.C - 0.5) > 1e-8) why << "C = " << o.C << "; ";
  const double pdev = max_const_dev(
      [&](double x) { return o.transform->phi(x) - x * x * x / 3.0; }, dom);
  if (pdev > 1e-9) why << "phi - x^3/3 varies by " << pdev << "; ";
  // point-transformation linearisability is declared out of scope by the
  // command-line tool rather than silently ignored
#ifdef SUNDMAN_CLI_PATH
  const std::string doc = "/tmp/sundman_acceptance_crit3.json";
  {
    std::FILE* f = std::fopen(doc.c_str(), "w");
    std::fputs(R"({"gamma":"1/x","A":"x","b":"1/2","domain":[0.5,3.0]})", f);
    std::fclose(f);
  }
  const std::string cmd =
      std::string(SUNDMAN_CLI_PATH) + " check " + doc + " 2>&1";
  std::string out;
  if (std::FILE* p = popen(cmd.c_str(), "r")) {
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    pclose(p);
  }
  if (out.find("not checked by this tool") == std::string::npos)
    why << "scope note missing from tool output";
#endif
}

void crit4_cubic_family(std::ostringstream& why) {
  const Interval dom{0.5, 2.0};
  const Binding params{{"k1", 2.0}, {"k2", -1.0}};
  const QuadraticSode s = make_sode("1/x", "x", "k1*x^3 + k2", dom, params);
  const LinearisationOutcome o = linearize(s);
  if (!o.linearisable()) {
    why << "family member classified " << to_string(o.kind);
    return;
  }
  if (o.q_max > 1e-9 * o.q_scale)
    why << "Q grid max " << o.q_max << " above 1e-9 * scale " << o.q_scale
        << "; ";
  const QuadraticSode pert =
      make_sode("1/x", "x", "k1*x^3 + k2 + 0.01*x^5", dom, params);
  const LinearisationOutcome po = linearize(pert);
  if (po.kind != LinCase::NotLinearisable)
    why << "perturbed member classified " << to_string(po.kind) << "; ";
  else if (po.q_max < 1e3 * 1e-9 * po.q_scale)
    why << "perturbed Q grid max " << po.q_max << " below 1e3*q_tol*scale";
}

void crit5_lienard(std::ostringstream& why) {
  const Interval dom{0.5, 2.0};
  const QuadraticSode s = make_sode("0", "x", "x^3/2 + x", dom);
  const LinearisationOutcome o = linearize(s);
  if (!o.linearisable()) {
    why << "unperturbed classified " << to_string(o.kind);
    return;
  }
  if (o.q_max > 1e-9 * o.q_scale)
    why << "Q grid max " << o.q_max << " not zero at grid tolerance; ";
  const QuadraticSode pert = make_sode("0", "x", "x^3/2 + x + 0.05", dom);
  const LinearisationOutcome po = linearize(pert);
  if (po.kind != LinCase::NotLinearisable)
    why << "perturbed classified " << to_string(po.kind);
}

void crit6_kepler(std::ostringstream& why) {
  const Interval dom{0.2, 3.0};
  const Binding params{{"k", 1.0}, {"ell", 1.0}};
  const double E = -0.5;
  const NaturalSystem sys{
      ScalarFunction::parse("-k/x + ell^2/(2*x^2)", "x", dom, params), E};
  const auto sol = find_energy_f(sys);
  if (!sol) {
    why << "no monomial rescaling found";
    return;
  }
  if (std::fabs(sol->exponent - 1.0) > 1e-12)
    why << "exponent " << sol->exponent << "; ";
  if (std::fabs(sol->reduction.A - E) > 1e-9)
    why << "A = " << sol->reduction.A << "; ";
  if (std::fabs(sol->reduction.B - 1.0) > 1e-9)
    why << "B = " << sol->reduction.B << "; ";
  if (std::fabs(sol->reduction.C + 0.5) > 1e-9)
    why << "C = " << sol->reduction.C << "; ";

  // residual d^2 r / dtau^2 - (2 E r + k) along an integrated trajectory on
  // the E = -1/2 level (the circular orbit) and on a nearby eccentric one
  // measured against its own energy
  const SodeField field =
      SodeField::parse(1, {"ell^2/x^3 - k/x^2"}, {dom}, params);
  const BasicFunction f = BasicFunction::parse("x", 1, {dom}, params);
  const auto accel_at = [&](double energy) {
    return [energy](const State& x, const State&) {
      return 2.0 * energy * x[0] + 1.0;
    };
  };
  const CorrespondenceReport circ = verify_field_transform(
      field, f, {1.0}, {0.0}, 1.0, 1e-10, 1e-5, accel_at(E), 0);
  if (!circ.pass || circ.accel_residual > 1e-4)
    why << "circular-orbit residual " << circ.accel_residual << "; ";
  const double v0 = 0.3;
  const double e_traj = v0 * v0 / 2 - 1.0 + 0.5;
  const CorrespondenceReport ecc = verify_field_transform(
      field, f, {1.0}, {v0}, 1.0, 1e-10, 1e-5, accel_at(e_traj), 0);
  if (!ecc.pass || ecc.accel_residual > 1e-4)
    why << "eccentric-orbit residual " << ecc.accel_residual;
}

void crit7_invariant_covariance(std::ostringstream& why) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  std::mt19937 rng(20240817);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const Interval dom{0.5, 2.0};
  double worst_sundman = 0.0, worst_coord = 0.0, worst_p = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Binding sp{{"g0", uni(-0.5, 0.5)}, {"g1", uni(-0.5, 0.5)},
                     {"a0", uni(0.5, 1.5)},  {"a1", uni(-0.4, 0.4)},
                     {"b0", uni(-1.0, 1.0)}, {"b1", uni(-1.0, 1.0)},
                     {"b2", uni(0.5, 2.0)}};
    const QuadraticSode s = make_sode(
        "g0 + g1*sin(x)", "a0 + a1*x", "b0 + b1*cos(b2*x) + x^2/4", dom, sp);
    const RealFn q = q_invariant(s);
    const RealFn p = p_invariant(s);

    // pure rescaling: Q -> Q / h^4
    const Binding hp{{"h0", uni(1.0, 2.0)}, {"h1", uni(-0.4, 0.4)},
                     {"h2", uni(0.5, 2.0)}};
    const RealFn h = RealFn::from_scalar(
        ScalarFunction::parse("h0 + h1*sin(h2*x)", "x", dom, hp));
    const RealFn q2 = q_invariant(apply_pure_sundman(s, h));
    for (int i = 0; i < 32; ++i) {
      const double x = dom.lo + (i + 0.5) * dom.length() / 32;
      const double want = q(x) / std::pow(h(x), 4);
      worst_sundman = std::max(
          worst_sundman, std::fabs(q2(x) - want) /
                             std::max({1.0, std::fabs(want), std::fabs(q(x))}));
    }

    // coordinate change: Q -> Q/phi', P unchanged
    const Binding pp{{"p0", uni(1.0, 2.0)}, {"p1", uni(-0.3, 0.3)},
                     {"p2", uni(0.5, 2.0)}};
    const ScalarFunction phi_s =
        ScalarFunction::parse("p0*x + p1*sin(p2*x)", "x", dom, pp);
    const RealFn phi = RealFn::from_scalar(phi_s);
    const QuadraticSode sc = apply_coordinate_change(s, phi);
    const RealFn qc = q_invariant(sc);
    const RealFn pc = p_invariant(sc);
    for (int i = 0; i < 32; ++i) {
      const double x = dom.lo + (i + 0.5) * dom.length() / 32;
      const double want = q(x) / phi.d1(x);
      worst_coord = std::max(
          worst_coord, std::fabs(qc(phi(x)) - want) /
                           std::max({1.0, std::fabs(want), std::fabs(q(x))}));
      worst_p = std::max(worst_p,
                         std::fabs(pc(phi(x)) - p(x)) /
                             std::max(1.0, std::fabs(p(x))));
    }
  }
  if (worst_sundman > 1e-7)
    why << "pure-rescaling covariance off by " << worst_sundman << "; ";
  if (worst_coord > 1e-7)
    why << "coordinate covariance off by " << worst_coord << "; ";
  if (worst_p > 1e-8) why << "P not invariant, off by " << worst_p << "; ";
  const double secs =
      std::chrono::duration<double>(clock::now() - start).count();
  if (secs >= 30.0) why << "runtime " << secs << " s";
}

void crit8_group_laws(std::ostringstream& why) {
  std::mt19937 rng(987654321);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const Interval dom{0.5, 2.0};
  const Interval wide{0.05, 12.0};
  auto random_transform = [&](const Interval& d) {
    const Binding hp{{"h0", uni(1.0, 2.0)}, {"h1", uni(-0.4, 0.4)},
                     {"h2", uni(0.5, 2.0)}};
    const Binding pp{{"p0", uni(1.0, 2.0)}, {"p1", uni(-0.3, 0.3)},
                     {"p2", uni(0.5, 2.0)}};
    return GenSundman(
        RealFn::from_scalar(
            ScalarFunction::parse("h0 + h1*sin(h2*x)", "x", d, hp)),
        RealFn::from_scalar(
            ScalarFunction::parse("p0*x + p1*sin(p2*x)", "x", d, pp)),
        d);
  };
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const GenSundman t1 = random_transform(dom);
    const GenSundman t2 = random_transform(wide);
    const GenSundman t3 = random_transform({0.02, 30.0});
    const GenSundman left = compose(t3, compose(t2, t1));
    const GenSundman right = compose(compose(t3, t2), t1);
    const GenSundman ident = GenSundman::identity(dom);
    const GenSundman id_t = compose(GenSundman::identity(wide), t1);
    const GenSundman t_inv = compose(inverse(t1), t1);
    const Factorization f1 = factorize(t1, FactorOrder::SundmanThenCoordinate);
    const GenSundman rebuilt1 = compose(f1.coordinate_part, f1.sundman_part);
    const Factorization f2 = factorize(t1, FactorOrder::CoordinateThenSundman);
    const GenSundman rebuilt2 = compose(f2.sundman_part, f2.coordinate_part);
    for (int i = 0; i < 16; ++i) {
      const double x =
          left.domain.lo + (i + 0.5) * left.domain.length() / 16;
      worst = std::max(worst, std::fabs(left.h(x) - right.h(x)));
      worst = std::max(worst, std::fabs(left.phi(x) - right.phi(x)));
      const double xd = dom.lo + (i + 0.5) * dom.length() / 16;
      worst = std::max(worst, std::fabs(id_t.h(xd) - t1.h(xd)));
      worst = std::max(worst, std::fabs(id_t.phi(xd) - t1.phi(xd)));
      worst = std::max(worst, std::fabs(t_inv.h(xd) - ident.h(xd)));
      worst = std::max(worst, std::fabs(t_inv.phi(xd) - ident.phi(xd)));
      worst = std::max(worst, std::fabs(rebuilt1.h(xd) - t1.h(xd)));
      worst = std::max(worst, std::fabs(rebuilt1.phi(xd) - t1.phi(xd)));
      worst = std::max(worst, std::fabs(rebuilt2.h(xd) - t1.h(xd)));
      worst = std::max(worst, std::fabs(rebuilt2.phi(xd) - t1.phi(xd)));
    }
  }
  if (worst > 1e-9) why << "worst pointwise deviation " << worst;
}

void crit9_field_correspondence(std::ostringstream& why) {
  const std::vector<Interval> dom1{{-3.0, 3.0}};
  const SodeField osc1 = SodeField::parse(1, {"-x"}, dom1);
  const BasicFunction f1 = BasicFunction::parse("1 + x^2/4", 1, dom1);
  const CorrespondenceReport r1 =
      verify_field_transform(osc1, f1, {1.0}, {0.0}, 2.0, 1e-10, 1e-5);
  if (!r1.pass || r1.max_state_error > 1e-5)
    why << "1-D state error " << r1.max_state_error << "; ";
  if (r1.max_velocity_error > 1e-5)
    why << "1-D quasi-velocity error " << r1.max_velocity_error << "; ";

  const std::vector<Interval> dom2{{-3.0, 3.0}, {-3.0, 3.0}};
  const SodeField osc2 = SodeField::parse(2, {"-x1", "-x2"}, dom2);
  const BasicFunction f2 =
      BasicFunction::parse("1 + (x1^2 + x2^2)/4", 2, dom2);
  const CorrespondenceReport r2 = verify_field_transform(
      osc2, f2, {1.0, 0.0}, {0.0, 0.8}, 2.0, 1e-10, 1e-5);
  if (!r2.pass || r2.max_state_error > 1e-5)
    why << "2-D state error " << r2.max_state_error << "; ";
  if (r2.max_velocity_error > 1e-5)
    why << "2-D quasi-velocity error " << r2.max_velocity_error << "; ";

  // composing two rescalings equals rescaling by the product
  const BasicFunction g = BasicFunction::parse("2 + sin(x1 + x2)", 2, dom2);
  const BasicFunction fg = BasicFunction::parse(
      "(1 + (x1^2 + x2^2)/4)*(2 + sin(x1 + x2))", 2, dom2);
  const SodeField twice = transform_system(transform_system(osc2, f2), g);
  const SodeField once = transform_system(osc2, fg);
  double worst = 0.0;
  for (double a : {-2.0, -0.5, 1.0, 2.5})
    for (double b : {-1.5, 0.5, 2.0})
      for (double v : {-1.0, 0.7})
        for (int i = 0; i < 2; ++i)
          worst = std::max(worst,
                           std::fabs(twice.component(i, {a, b}, {v, -v}) -
                                     once.component(i, {a, b}, {v, -v})));
  if (worst > 1e-9) why << "double-transform mismatch " << worst;
}

void crit10_detectors(std::ostringstream& why) {
  std::mt19937 rng(13579);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const std::vector<Interval> dom{{-1.0, 1.0}, {-1.0, 1.0}};
  int member_fail = 0, nonmember_fail = 0;

  auto lin_exprs = [&](double C0, double C1) {
    std::vector<std::string> comps;
    for (int i = 0; i < 2; ++i) {
      std::ostringstream os;
      os << num(uni(-2, 2)) << "*x1 + " << num(uni(-2, 2)) << "*x2 + "
         << num(uni(-2, 2)) << "*v1 + " << num(uni(-2, 2)) << "*v2";
      if (i == 0 && C0 != 0.0) os << " + " << num(C0);
      if (i == 1 && C1 != 0.0) os << " + " << num(C1);
      comps.push_back(os.str());
    }
    return comps;
  };

  // 8 homogeneous linear members
  for (int k = 0; k < 8; ++k) {
    const SodeField f = SodeField::parse(2, lin_exprs(0, 0), dom);
    const LinearCheck c = check_linear(f);
    if (!c.linear || c.residual > 1e-8) ++member_fail;
  }
  // 6 fibre-linear members with position-dependent coefficients
  for (int k = 0; k < 6; ++k) {
    const std::string a = num(uni(-2, 2)), b = num(uni(-2, 2));
    const SodeField f = SodeField::parse(
        2,
        {a + "*sin(x1)*v1 + " + b + "*x2*v2", b + "*cos(x2)*v1"},
        {{0.2, 1.4}, {0.2, 1.4}});
    const FibreLinearCheck c = check_fibre_linear(f);
    if (!c.fibre_linear || c.residual > 1e-8) ++member_fail;
  }
  // 6 inhomogeneous linear members
  for (int k = 0; k < 6; ++k) {
    const SodeField f =
        SodeField::parse(2, lin_exprs(uni(-2, 2), uni(-2, 2)), dom);
    const auto c = check_inhomogeneous_linear(f);
    if (!c || c->residual > 1e-8) ++member_fail;
  }
  if (member_fail > 0) why << member_fail << " members rejected; ";

  // 20 constructed non-members, each aimed at the matching detector
  const char* nonlinear_terms[] = {"x1^3",       "x1*v2",  "v1^2",
                                   "sin(v1)",    "exp(x2)", "x2^2",
                                   "x1*x2",      "v2^3"};
  for (int k = 0; k < 8; ++k) {
    auto comps = lin_exprs(0, 0);
    comps[k % 2] += std::string(" + ") + nonlinear_terms[k];
    if (check_linear(SodeField::parse(2, comps, dom)).linear) ++nonmember_fail;
  }
  const char* fibre_breakers[] = {"-x1", "v1^2", "1", "sin(x1)",
                                  "v1*v2", "x2^2"};
  for (int k = 0; k < 6; ++k) {
    const SodeField f = SodeField::parse(
        2, {std::string("sin(x1)*v1 + ") + fibre_breakers[k], "cos(x2)*v2"},
        {{0.2, 1.4}, {0.2, 1.4}});
    if (check_fibre_linear(f).fibre_linear) ++nonmember_fail;
  }
  const char* inhom_breakers[] = {"x1^2", "x1*v1", "cos(v2)",
                                  "exp(x1)", "v2^2", "x2^3"};
  for (int k = 0; k < 6; ++k) {
    auto comps = lin_exprs(uni(-2, 2), uni(-2, 2));
    comps[k % 2] += std::string(" + ") + inhom_breakers[k];
    if (check_inhomogeneous_linear(SodeField::parse(2, comps, dom)))
      ++nonmember_fail;
  }
  if (nonmember_fail > 0) why << nonmember_fail << " non-members accepted";
}

void crit11_convergence(std::ostringstream& why) {
  struct Fixture {
    const char* name;
    QuadraticSode s;
    double base, x0, v0, T;
  };
  const double pi = 3.14159265358979323846;
  const std::vector<Fixture> fixtures{
      {"inverse-cube",
       make_sode("2/x", "0", "1/x^3", {0.3, 3.0}), 1.0, 1.0, 0.0, 0.8},
      {"sphere",
       make_sode("-2*cot(x)", "0", "-sin(x)*cos(x)", {0.3, pi - 0.3}),
       pi / 2, 1.0, 0.0, 1.2},
      {"general-linear",
       make_sode("1/x", "x", "1/2", {0.5, 3.0}), 1.0, 1.0, 0.0, 2.0},
  };
  for (const Fixture& fx : fixtures) {
    LinearizeConfig cfg;
    cfg.base_point = fx.base;
    const LinearisationOutcome o = linearize(fx.s, cfg);
    if (!o.linearisable()) {
      why << fx.name << " not linearisable; ";
      continue;
    }
    const CorrespondenceReport coarse =
        verify_linearisation(fx.s, o, fx.x0, fx.v0, fx.T, 1e-8, 1.0);
    const CorrespondenceReport fine =
        verify_linearisation(fx.s, o, fx.x0, fx.v0, fx.T, 1e-10, 1.0);
    if (!(fine.max_state_error * 10.0 <= coarse.max_state_error))
      why << fx.name << ": " << coarse.max_state_error << " -> "
          << fine.max_state_error << " is less than 10x; ";
  }
}

}  // namespace

int main() {
  criterion(1, "inverse-cube oscillator linearises to y'' + 1 = 0 and verifies",
            crit1_inverse_cube);
  criterion(2, "sphere geodesic equation linearises with h = |cot x|",
            crit2_sphere);
  criterion(3, "quadratic-drag equation reaches y'' + y' + 1/2 = 0 via y = x^3/3",
            crit3_general_linear);
  criterion(4, "cubic forcing family has Q = 0; x^5 perturbation is rejected",
            crit4_cubic_family);
  criterion(5, "Lienard family with g = k1 f int f + k2 f passes; +0.05 fails",
            crit5_lienard);
  criterion(6, "radial Kepler rescaled by f = r becomes r'' = 2Er + k",
            crit6_kepler);
  criterion(7, "Q and P transform covariantly over randomized equations",
            crit7_invariant_covariance);
  criterion(8, "transformations satisfy the group laws and factorizations",
            crit8_group_laws);
  criterion(9, "quasi-velocity correspondence holds for rescaled oscillators",
            crit9_field_correspondence);
  criterion(10, "linearity detectors accept members and reject non-members",
            crit10_detectors);
  criterion(11, "tightening the integrator tolerance shrinks the error 10x",
            crit11_convergence);
  if (g_failures > 0) {
    std::cout << g_failures << " criteria failed" << std::endl;
    return 1;
  }
  std::cout << "all 11 criteria passed" << std::endl;
  return 0;
}
