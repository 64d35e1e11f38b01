// sundman: classify, transform, and verify second-order ODEs under
// generalised Sundman transformations.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sundman/json_io.hpp"

using namespace sundman;
using nlohmann::json;

namespace {

struct RunConfig {
  double q_tol = 1e-9;
  double zero_tol = 1e-9;
  double affine_tol = 1e-7;
  double quad_tol = 1e-12;
  double ivp_tol = 1e-10;
  std::optional<double> base_point;
  int grid_n = 64;
  std::string format = "pretty";
  std::string out_file;
  Binding params;

  LinearizeConfig linearize_config() const {
    LinearizeConfig c;
    c.q_tol = q_tol;
    c.zero_tol = zero_tol;
    c.affine_tol = affine_tol;
    c.quad_tol = quad_tol;
    c.base_point = base_point;
    c.grid_n = grid_n;
    return c;
  }

  void validate() const {
    for (double t : {q_tol, zero_tol, affine_tol, quad_tol, ivp_tol})
      if (!(t > 0.0)) throw DomainError("config: tolerances must be positive");
    if (grid_n < 16) throw DomainError("config: grid_n must be at least 16");
    if (format != "json" && format != "csv" && format != "pretty")
      throw DomainError("config: format must be one of json, csv, pretty");
  }
};

void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot open " + path);
  json doc = json::parse(in);
  if (doc.contains("q_tol")) rc.q_tol = doc["q_tol"].get<double>();
  if (doc.contains("zero_tol")) rc.zero_tol = doc["zero_tol"].get<double>();
  if (doc.contains("affine_tol"))
    rc.affine_tol = doc["affine_tol"].get<double>();
  if (doc.contains("quad_tol")) rc.quad_tol = doc["quad_tol"].get<double>();
  if (doc.contains("ivp_tol")) rc.ivp_tol = doc["ivp_tol"].get<double>();
  if (doc.contains("base_point"))
    rc.base_point = doc["base_point"].get<double>();
  if (doc.contains("grid_n")) rc.grid_n = doc["grid_n"].get<int>();
  if (doc.contains("format")) rc.format = doc["format"].get<std::string>();
}

void emit(const RunConfig& rc, const std::string& text) {
  if (rc.out_file.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    std::ofstream out(rc.out_file);
    if (!out) throw DomainError("cannot open output file " + rc.out_file);
    out << text;
  }
}

json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open input file " + path);
  return json::parse(in);
}

constexpr const char* kLieNote =
    "point-transformation (Lie) linearisability is not checked by this tool";

std::string outcome_pretty(const LinearisationOutcome& o, bool emit_transform) {
  std::ostringstream os;
  os << "case: " << to_string(o.kind) << "\n";
  if (o.kind == LinCase::Linear)
    os << "target: y'' + " << o.alpha << " y' + " << o.B << " y + " << o.C
       << " = 0\n";
  else if (o.kind == LinCase::UnitForcing)
    os << "target: y'' + 1 = 0\n";
  else if (o.kind == LinCase::FreeParticle)
    os << "target: y'' = 0\n";
  os << "base point: " << o.base_point << "\n";
  if (!o.q_samples.empty())
    os << "Q grid max: " << o.q_max << " (scale " << o.q_scale << ")\n";
  if (!o.note.empty()) os << "note: " << o.note << "\n";
  os << "note: " << kLieNote << "\n";
  if (emit_transform && o.transform) {
    const json tj = io::transform_to_json(*o.transform);
    os << "transform:\n" << tj.dump(2) << "\n";
  }
  return os.str();
}

std::string q_samples_csv(const LinearisationOutcome& o) {
  std::ostringstream os;
  os << "x,Q\n";
  char buf[40];
  for (const auto& [x, q] : o.q_samples) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", q);
    os << buf << '\n';
  }
  return os.str();
}

int cmd_check(const std::string& input, const RunConfig& rc,
              bool emit_transform) {
  const auto parsed = io::parse_sode_document(load_document(input), rc.params);
  if (std::holds_alternative<NotQuadratic>(parsed)) {
    const auto& nq = std::get<NotQuadratic>(parsed);
    if (rc.format == "json") {
      json j;
      j["case"] = "not-quadratic";
      j["linearisable"] = false;
      j["reason"] = nq.reason;
      emit(rc, j.dump(2));
    } else {
      emit(rc, "case: not-quadratic\nreason: " + nq.reason + "\n");
    }
    return 2;
  }
  const auto& s = std::get<QuadraticSode>(parsed);
  LinearisationOutcome o = linearize(s, rc.linearize_config());
  if (rc.format == "json") {
    json j = io::outcome_to_json(o);
    j["lie_check"] = "not-attempted";
    if (!emit_transform) j.erase("transform");
    emit(rc, j.dump(2));
  } else if (rc.format == "csv") {
    emit(rc, q_samples_csv(o));
  } else {
    emit(rc, outcome_pretty(o, emit_transform));
  }
  return o.linearisable() ? 0 : 2;
}

std::string report_pretty(const CorrespondenceReport& r) {
  std::ostringstream os;
  os << "verdict: " << (r.pass ? "pass" : "fail") << " (tolerance " << r.tol
     << ")\n";
  os << "max state error: " << r.max_state_error << "\n";
  os << "max velocity error: " << r.max_velocity_error << "\n";
  os << "tau(t) quadrature vs augmented state: " << r.tau_augmented_deviation
     << "\n";
  if (r.accel_residual >= 0.0)
    os << "max second-derivative residual: " << r.accel_residual << "\n";
  os << "integrator: " << r.stats.accepted << " accepted / "
     << r.stats.rejected << " rejected steps at tol " << r.stats.tol << "\n";
  if (r.truncated) os << "truncated: yes\n";
  if (!r.note.empty()) os << "note: " << r.note << "\n";
  return os.str();
}

/// Columns t, x, tau, y_mapped, y_closed_form for plotting.
std::string demo_csv(const CorrespondenceReport& r) {
  std::ostringstream os;
  os << "t,x,tau,y_mapped,y_closed_form\n";
  char buf[40];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << sep;
  };
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    put(r.t[i], ',');
    put(r.state_orig[i][0], ',');
    put(r.tau[i], ',');
    put(r.state_mapped[i][0], ',');
    put(r.state_target[i][0], '\n');
  }
  return os.str();
}

int emit_report(const RunConfig& rc, const CorrespondenceReport& rep,
                const std::string& pretty_prefix = "") {
  if (rc.format == "json") {
    emit(rc, io::report_to_json(rep).dump(2));
  } else if (rc.format == "csv") {
    emit(rc, demo_csv(rep));
  } else {
    emit(rc, pretty_prefix + report_pretty(rep));
  }
  return rep.pass ? 0 : 2;
}

int cmd_verify(const std::string& input, const RunConfig& rc, double x0,
               double v0, double T, double tol, double inject_h_scale) {
  const auto parsed = io::parse_sode_document(load_document(input), rc.params);
  if (std::holds_alternative<NotQuadratic>(parsed))
    throw DomainError("verify: input is not quadratic in the velocity: " +
                      std::get<NotQuadratic>(parsed).reason);
  const auto& s = std::get<QuadraticSode>(parsed);
  const LinearisationOutcome o = linearize(s, rc.linearize_config());
  if (!o.linearisable()) {
    emit(rc, "case: " + std::string(to_string(o.kind)) +
                 " -- nothing to verify\n");
    return 2;
  }
  const CorrespondenceReport rep =
      verify_linearisation(s, o, x0, v0, T, rc.ivp_tol, tol, inject_h_scale);
  return emit_report(rc, rep);
}

int cmd_field(const std::string& input, const RunConfig& rc) {
  const io::ParsedField pf =
      io::parse_field_document(load_document(input), rc.params);
  const LinearCheck lin = check_linear(pf.field);
  const FibreLinearCheck fib = check_fibre_linear(pf.field);
  const auto inhom = check_inhomogeneous_linear(pf.field);

  json j;
  j["n"] = pf.field.n;
  j["linear"] = lin.linear;
  if (lin.linear) {
    j["linear_certificate"] = {{"A", lin.A}, {"B", lin.B}};
  }
  j["fibre_linear"] = fib.fibre_linear;
  if (fib.fibre_linear) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : fib.A) {
      std::vector<std::string> r;
      for (const auto& e : row) r.push_back(e.str());
      rows.push_back(std::move(r));
    }
    j["fibre_linear_certificate"] = rows;
  }
  j["inhomogeneous_linear"] = inhom.has_value();
  if (inhom)
    j["inhomogeneous_certificate"] = {
        {"A", inhom->A}, {"B", inhom->B}, {"C", inhom->C}};
  if (pf.f) {
    const SodeField bar = transform_system(pf.field, *pf.f);
    std::vector<std::string> comps;
    for (const auto& c : bar.components) comps.push_back(c.str());
    j["transformed_components"] = comps;
  }

  if (rc.format == "json") {
    emit(rc, j.dump(2));
  } else {
    std::ostringstream os;
    os << "linear: " << (lin.linear ? "yes" : "no") << "\n";
    os << "fibre-linear: " << (fib.fibre_linear ? "yes" : "no") << "\n";
    os << "inhomogeneous-linear: " << (inhom ? "yes" : "no") << "\n";
    if (inhom) {
      os << "  C =";
      for (double c : inhom->C) os << ' ' << c;
      os << "\n";
    }
    if (pf.f)
      for (const auto& c : j["transformed_components"])
        os << "transformed: " << c.get<std::string>() << "\n";
    emit(rc, os.str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bundled demonstration fixtures

QuadraticSode make_sode(const std::string& gamma, const std::string& A,
                        const std::string& b, Interval dom,
                        const Binding& params) {
  return QuadraticSode::from_scalar(
      ScalarFunction::parse(gamma, "x", dom, params),
      ScalarFunction::parse(A, "x", dom, params),
      ScalarFunction::parse(b, "x", dom, params), dom);
}

double param_or(const Binding& params, const std::string& name, double dflt) {
  auto it = params.find(name);
  return it == params.end() ? dflt : it->second;
}

int demo_linearisable(const RunConfig& rc, const QuadraticSode& s,
                      double base_point, double x0, double v0, double T,
                      const std::string& headline) {
  LinearizeConfig lc = rc.linearize_config();
  if (!lc.base_point) lc.base_point = base_point;
  const LinearisationOutcome o = linearize(s, lc);
  const CorrespondenceReport rep =
      verify_linearisation(s, o, x0, v0, T, rc.ivp_tol, 1e-6);
  if (rc.format == "json") {
    json j;
    j["demo"] = headline;
    j["outcome"] = io::outcome_to_json(o);
    j["report"] = io::report_to_json(rep);
    j["csv"] = demo_csv(rep);
    emit(rc, j.dump(2));
  } else if (rc.format == "csv") {
    emit(rc, demo_csv(rep));
  } else {
    emit(rc, headline + "\n" + outcome_pretty(o, true) + report_pretty(rep) +
                 "\n" + demo_csv(rep));
  }
  return rep.pass && o.linearisable() ? 0 : 2;
}

int demo_ermakov(const RunConfig& rc) {
  const Binding params{{"omega", param_or(rc.params, "omega", 1.0)}};
  const Interval dom{0.3, 3.0};
  const QuadraticSode s =
      make_sode("2/x", "0", "omega^2/x^3", dom, params);
  return demo_linearisable(
      rc, s, 1.0, 1.0, 0.0, 0.8,
      "Ermakov-Pinney x'' + (2/x) x'^2 + omega^2/x^3 = 0 (dtau = omega^2/x dt)");
}

int demo_sphere(const RunConfig& rc) {
  const double pi = 3.14159265358979323846;
  const Interval dom{0.3, pi - 0.3};
  const QuadraticSode s = make_sode("-2*cot(x)", "0", "-sin(x)*cos(x)", dom, {});
  return demo_linearisable(
      rc, s, pi / 2, 1.0, 0.0, 1.2,
      "Sphere geodesics x'' = 2 x'^2 cot(x) + sin(x)cos(x) (dtau = |cot x| dt)");
}

int demo_nap(const RunConfig& rc) {
  const Interval dom{0.5, 3.0};
  const QuadraticSode s = make_sode("1/x", "x", "1/2", dom, {});
  return demo_linearisable(
      rc, s, 1.0, 1.0, 0.0, 2.0,
      "x'' + (1/x) x'^2 + x x' + 1/2 = 0  ->  y'' + y' + 1/2 = 0 (y = x^3/3)");
}

int demo_oscillator_damped(const RunConfig& rc) {
  const Interval dom{-2.0, 2.0};
  const QuadraticSode s = make_sode("0", "1", "x", dom, {});
  return demo_linearisable(rc, s, 0.0, 1.0, 0.0, 3.0,
                           "Damped oscillator x'' + x' + x = 0 (already linear)");
}

int demo_lienard(const RunConfig& rc) {
  // x'' + f(x) x' + g(x) = 0 with f = x and g = k1 f int f + k2 f
  const double k1 = param_or(rc.params, "k1", 1.0);
  const double k2 = param_or(rc.params, "k2", 1.0);
  const Interval dom{0.5, 2.0};
  const Binding params{{"k1", k1}, {"k2", k2}};
  const QuadraticSode s =
      make_sode("0", "x", "k1*x^3/2 + k2*x", dom, params);
  const QuadraticSode s_pert =
      make_sode("0", "x", "k1*x^3/2 + k2*x + 0.05", dom, params);

  LinearizeConfig lc = rc.linearize_config();
  const LinearisationOutcome good = linearize(s, lc);
  const LinearisationOutcome bad = linearize(s_pert, lc);

  if (rc.format == "json") {
    json j;
    j["demo"] = "Lienard x'' + x x' + g(x) = 0, g = k1 x^3/2 + k2 x";
    j["outcome"] = io::outcome_to_json(good);
    j["perturbed_outcome"] = io::outcome_to_json(bad);
    emit(rc, j.dump(2));
  } else if (rc.format == "csv") {
    emit(rc, q_samples_csv(good));
  } else {
    std::ostringstream os;
    os << "Lienard x'' + x x' + g(x) = 0 with g = k1 x^3/2 + k2 x (k1=" << k1
       << ", k2=" << k2 << ")\n";
    os << outcome_pretty(good, true);
    os << "with g perturbed by +0.05: case " << to_string(bad.kind)
       << ", Q grid max " << bad.q_max << "\n";
    emit(rc, os.str());
  }
  return good.linearisable() && !bad.linearisable() ? 0 : 2;
}

int demo_kepler(const RunConfig& rc) {
  const double k = param_or(rc.params, "k", 1.0);
  const double ell = param_or(rc.params, "ell", 1.0);
  const double E = param_or(rc.params, "E", -0.5);
  const Interval dom{0.2, 3.0};
  const Binding params{{"k", k}, {"ell", ell}};

  // radial Kepler at fixed angular momentum: V = -k/r + ell^2/(2 r^2)
  const ScalarFunction V =
      ScalarFunction::parse("-k/x + ell^2/(2*x^2)", "x", dom, params);
  const NaturalSystem sys{V, E};
  const auto sol = find_energy_f(sys);
  if (!sol) throw DomainError("demo kepler: no monomial f found");

  // correspondence run; residual measured against the trajectory's own energy
  const SodeField field =
      SodeField::parse(1, {"ell^2/x^3 - k/x^2"}, {dom}, params);
  const BasicFunction f = BasicFunction::parse("x", 1, {dom}, params);
  const double r0 = 1.0, v0 = 0.3;
  const double E_traj = v0 * v0 / 2.0 + V(r0);
  const auto accel = [E_traj, k](const State& x, const State&) {
    return 2.0 * E_traj * x[0] + k;
  };
  const CorrespondenceReport rep = verify_field_transform(
      field, f, {r0}, {v0}, 1.0, rc.ivp_tol, 1e-5, accel, 0);

  std::ostringstream csv;
  csv << "tau,residual\n";
  char buf[40];
  for (const auto& [tau, r] : rep.accel_samples) {
    std::snprintf(buf, sizeof buf, "%.17g", tau);
    csv << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r);
    csv << buf << '\n';
  }

  if (rc.format == "json") {
    json j;
    j["demo"] = "Kepler radial motion, dtau = dt/r  ->  r'' = 2 E r + k";
    j["exponent"] = sol->exponent;
    j["A"] = sol->reduction.A;
    j["B"] = sol->reduction.B;
    j["C"] = sol->reduction.C;
    j["report"] = io::report_to_json(rep);
    j["residual_csv"] = csv.str();
    emit(rc, j.dump(2));
  } else if (rc.format == "csv") {
    emit(rc, csv.str());
  } else {
    std::ostringstream os;
    os << "Kepler radial motion (E=" << E << ", k=" << k << ", ell=" << ell
       << ")\n";
    os << "f(r) = r^" << sol->exponent << " accepted: A=" << sol->reduction.A
       << " B=" << sol->reduction.B << " C=" << sol->reduction.C << "\n";
    os << "target in tau: r'' = 2 E r + k\n";
    os << report_pretty(rep) << "\n" << csv.str();
    emit(rc, os.str());
  }
  return rep.pass && rep.accel_residual <= 1e-4 ? 0 : 2;
}

int cmd_demo(const std::string& name, const RunConfig& rc) {
  if (name == "ermakov") return demo_ermakov(rc);
  if (name == "sphere") return demo_sphere(rc);
  if (name == "nap") return demo_nap(rc);
  if (name == "lienard") return demo_lienard(rc);
  if (name == "kepler") return demo_kepler(rc);
  if (name == "oscillator-damped") return demo_oscillator_damped(rc);
  std::cerr << "unknown demo `" << name
            << "`; available: ermakov, sphere, nap, lienard, kepler, "
               "oscillator-damped\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Classification and verification of second-order ODEs under "
      "generalised Sundman transformations"};
  app.require_subcommand(1);

  std::string config_file;
  std::optional<double> q_tol, ivp_tol, base_point;
  std::string format;
  std::string out_file;
  std::vector<std::string> param_flags;
  app.add_option("--config", config_file,
                 "JSON config file (fallback: $SUNDMAN_CONFIG)");
  app.add_option("--q-tol", q_tol, "Q-invariant zero tolerance (default 1e-9)");
  app.add_option("--ivp-tol", ivp_tol,
                 "integrator local error tolerance (default 1e-10)");
  app.add_option("--base-point", base_point,
                 "anchor for antiderivatives and phi (default: domain midpoint)");
  app.add_option("--format", format, "output format: json, csv, pretty")
      ->check(CLI::IsMember({"json", "csv", "pretty"}));
  app.add_option("--param", param_flags,
                 "NAME=VALUE parameter binding (overrides document params)");
  app.add_option("--out", out_file, "write output to a file instead of stdout");

  std::string input_file, demo_name;
  double vx0 = 0.0, vv0 = 0.0, vT = 1.0, vtol = 1e-6, inject = 1.0;
  bool emit_transform = false;

  CLI::App* check = app.add_subcommand(
      "check", "classify a 1-D equation document (exit 0 linearisable, 2 not)");
  check->add_option("input", input_file, "SODE JSON document")->required();
  check->add_flag("--emit-transform", emit_transform,
                  "include the synthesized transformation in the output");

  CLI::App* lin = app.add_subcommand(
      "linearize", "classify and always emit the transformation");
  lin->add_option("input", input_file, "SODE JSON document")->required();

  CLI::App* verify = app.add_subcommand(
      "verify", "linearize, integrate, and compare against the closed form");
  verify->add_option("input", input_file, "SODE JSON document")->required();
  verify->add_option("--x0", vx0, "initial position")->required();
  verify->add_option("--v0", vv0, "initial velocity");
  verify->add_option("-T,--T", vT, "integration time")->required();
  verify->add_option("--tol", vtol, "pass/fail tolerance (default 1e-6)");
  verify->add_option("--inject-h-scale", inject,
                     "multiply h by this factor (fault-injection test hook)");

  CLI::App* demo = app.add_subcommand("demo", "run a bundled example");
  demo->add_option("name", demo_name,
                   "ermakov | sphere | nap | lienard | kepler | "
                   "oscillator-damped")
      ->required();

  CLI::App* fieldc = app.add_subcommand(
      "field", "linearity detectors and quasi-velocity transform (n-dim)");
  fieldc->add_option("input", input_file, "field JSON document")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig rc;
    if (config_file.empty()) {
      if (const char* env = std::getenv("SUNDMAN_CONFIG")) config_file = env;
    }
    if (!config_file.empty()) apply_config_file(rc, config_file);
    if (q_tol) rc.q_tol = *q_tol;
    if (ivp_tol) rc.ivp_tol = *ivp_tol;
    if (base_point) rc.base_point = base_point;
    if (!format.empty()) rc.format = format;
    rc.out_file = out_file;
    for (const auto& p : param_flags) {
      const auto eq = p.find('=');
      if (eq == std::string::npos)
        throw DomainError("--param expects NAME=VALUE, got `" + p + "`");
      rc.params[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    }
    rc.validate();

    if (check->parsed()) return cmd_check(input_file, rc, emit_transform);
    if (lin->parsed()) return cmd_check(input_file, rc, true);
    if (verify->parsed())
      return cmd_verify(input_file, rc, vx0, vv0, vT, vtol, inject);
    if (demo->parsed()) return cmd_demo(demo_name, rc);
    if (fieldc->parsed()) return cmd_field(input_file, rc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
