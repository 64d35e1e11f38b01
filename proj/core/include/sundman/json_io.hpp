#pragma once

#include <nlohmann/json.hpp>

#include "sundman/verify.hpp"

namespace sundman::io {

using nlohmann::json;

/// Input document for the one-dimensional classifier. Either the
/// coefficient form {"gamma","A","b","domain":[lo,hi],"params":{...}} or
/// the right-hand-side form {"X","domain","params"}, which is brought to
/// coefficient form (and may legitimately fail when X is not quadratic in
/// the velocity).
std::variant<QuadraticSode, NotQuadratic> parse_sode_document(
    const json& doc, const Binding& param_overrides = {});

struct ParsedField {
  SodeField field;
  std::optional<BasicFunction> f;
};

/// {"n": int, "X": [..strings..], "f": optional string,
///  "domain": [[lo,hi],...], "params": {...}}
ParsedField parse_field_document(const json& doc,
                                 const Binding& param_overrides = {});

/// A transformation component: closed form when available, otherwise a
/// knot table with stated interpolation order.
json realfn_to_json(const RealFn& fn, int knots = 65);

json transform_to_json(const GenSundman& t);

json outcome_to_json(const LinearisationOutcome& o);

json report_to_json(const CorrespondenceReport& r, bool embed_csv = true);

}  // namespace sundman::io
