#include "sundman/json_io.hpp"

#include <cmath>
#include <sstream>

namespace sundman::io {

namespace {

Binding parse_params(const json& doc, const Binding& overrides) {
  Binding params;
  if (doc.contains("params")) {
    if (!doc["params"].is_object())
      throw DomainError("document: \"params\" must be an object");
    for (const auto& [k, v] : doc["params"].items()) {
      if (!v.is_number())
        throw DomainError("document: parameter `" + k + "` must be a number");
      params[k] = v.get<double>();
    }
  }
  for (const auto& [k, v] : overrides) params[k] = v;  // flags win
  return params;
}

Interval parse_interval(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw DomainError(std::string("document: ") + what +
                      " must be a [lo, hi] pair");
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (!(iv.lo < iv.hi))
    throw DomainError(std::string("document: ") + what + " must have lo < hi");
  return iv;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_block(const std::vector<double>& t,
                      const std::vector<State>& cols_a,
                      const std::vector<State>* cols_b,
                      const std::string& t_name, const std::string& a_prefix,
                      const std::string& b_prefix) {
  std::ostringstream os;
  os << t_name;
  if (!cols_a.empty())
    for (std::size_t j = 0; j < cols_a.front().size(); ++j)
      os << ',' << a_prefix << (j + 1);
  if (cols_b && !cols_b->empty())
    for (std::size_t j = 0; j < cols_b->front().size(); ++j)
      os << ',' << b_prefix << (j + 1);
  os << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << fmt17(t[i]);
    for (double v : cols_a[i]) os << ',' << fmt17(v);
    if (cols_b)
      for (double v : (*cols_b)[i]) os << ',' << fmt17(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace

std::variant<QuadraticSode, NotQuadratic> parse_sode_document(
    const json& doc, const Binding& param_overrides) {
  if (!doc.is_object()) throw DomainError("document: expected a JSON object");
  if (!doc.contains("domain"))
    throw DomainError("document: missing \"domain\"");
  const Interval dom = parse_interval(doc["domain"], "domain");
  const Binding params = parse_params(doc, param_overrides);

  std::set<std::string> vars{"x"};
  for (const auto& [k, v] : params) vars.insert(k);

  if (doc.contains("X")) {
    std::set<std::string> xv = vars;
    xv.insert("v");
    const Expression X =
        parse_expression(doc["X"].get<std::string>(), xv);
    return normalize(X, dom, params);
  }

  for (const char* key : {"gamma", "A", "b"})
    if (!doc.contains(key) || !doc[key].is_string())
      throw DomainError(std::string("document: missing coefficient \"") + key +
                        "\" (or provide \"X\")");
  auto coeff = [&](const char* key) {
    return RealFn::from_expression(
        parse_expression(doc[key].get<std::string>(), vars), "x", dom, params);
  };
  return QuadraticSode(coeff("gamma"), coeff("A"), coeff("b"), dom);
}

ParsedField parse_field_document(const json& doc,
                                 const Binding& param_overrides) {
  if (!doc.is_object()) throw DomainError("document: expected a JSON object");
  if (!doc.contains("n") || !doc["n"].is_number_integer())
    throw DomainError("document: missing integer \"n\"");
  const int n = doc["n"].get<int>();
  if (!doc.contains("X") || !doc["X"].is_array() ||
      static_cast<int>(doc["X"].size()) != n)
    throw DomainError("document: \"X\" must be an array of n expressions");
  if (!doc.contains("domain") || !doc["domain"].is_array() ||
      static_cast<int>(doc["domain"].size()) != n)
    throw DomainError("document: \"domain\" must be an array of n intervals");

  std::vector<Interval> box;
  for (const auto& j : doc["domain"]) box.push_back(parse_interval(j, "domain entry"));
  const Binding params = parse_params(doc, param_overrides);

  std::vector<std::string> comps;
  for (const auto& j : doc["X"]) comps.push_back(j.get<std::string>());
  SodeField field = SodeField::parse(n, comps, box, params);

  std::optional<BasicFunction> f;
  if (doc.contains("f"))
    f = BasicFunction::parse(doc["f"].get<std::string>(), n, box, params);
  return ParsedField{std::move(field), std::move(f)};
}

json realfn_to_json(const RealFn& fn, int knots) {
  json j;
  if (fn.closed_form) {
    j["kind"] = "expression";
    j["text"] = fn.closed_form->str();
    j["variable"] = fn.var;
  } else {
    j["kind"] = "knots";
    j["interpolation"] = fn.has_d1() ? "cubic-hermite" : "linear";
    json table = json::array();
    for (int i = 0; i < knots; ++i) {
      const double x =
          fn.domain.lo + fn.domain.length() * i / (knots - 1);
      json row = json::array({x, fn(x)});
      if (fn.has_d1()) row.push_back(fn.d1(x));
      table.push_back(std::move(row));
    }
    j["knots"] = std::move(table);
  }
  j["domain"] = json::array({fn.domain.lo, fn.domain.hi});
  return j;
}

json transform_to_json(const GenSundman& t) {
  json j;
  j["h"] = realfn_to_json(t.h);
  j["phi"] = realfn_to_json(t.phi);
  j["domain"] = json::array({t.domain.lo, t.domain.hi});
  return j;
}

json outcome_to_json(const LinearisationOutcome& o) {
  json j;
  j["case"] = to_string(o.kind);
  j["linearisable"] = o.linearisable();
  j["alpha"] = o.alpha;
  j["B"] = o.B;
  j["C"] = o.C;
  j["base_point"] = o.base_point;
  j["scale_K"] = o.scale_K;
  j["q_max"] = o.q_max;
  j["q_scale"] = o.q_scale;
  json qs = json::array();
  for (const auto& [x, q] : o.q_samples) qs.push_back(json::array({x, q}));
  j["q_samples"] = std::move(qs);
  j["note"] = o.note;
  if (o.transform) j["transform"] = transform_to_json(*o.transform);
  return j;
}

json report_to_json(const CorrespondenceReport& r, bool embed_csv) {
  json j;
  j["max_state_error"] = r.max_state_error;
  j["max_velocity_error"] = r.max_velocity_error;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["tolerance"] = r.tol;
  j["truncated"] = r.truncated;
  j["tau_augmented_deviation"] = r.tau_augmented_deviation;
  if (r.accel_residual >= 0.0) j["accel_residual"] = r.accel_residual;
  j["note"] = r.note;
  j["integrator_stats"] = {{"accepted", r.stats.accepted},
                           {"rejected", r.stats.rejected},
                           {"tol", r.stats.tol},
                           {"truncated", r.stats.truncated}};
  json taus = json::array();
  for (std::size_t i = 0; i < r.t.size(); ++i)
    taus.push_back(json::array({r.t[i], r.tau[i]}));
  j["tau_of_t"] = std::move(taus);
  if (embed_csv) {
    j["original_csv"] =
        csv_block(r.t, r.state_orig, nullptr, "t", "y", "");
    j["transformed_csv"] = csv_block(r.tau, r.state_target, &r.vel_target,
                                     "tau", "y", "w");
    j["mapped_csv"] =
        csv_block(r.tau, r.state_mapped, &r.vel_mapped, "tau", "y", "w");
  }
  return j;
}

}  // namespace sundman::io
