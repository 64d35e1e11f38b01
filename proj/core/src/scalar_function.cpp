#include "sundman/scalar_function.hpp"

namespace sundman {

ScalarFunction::ScalarFunction(Expression expr, std::string var,
                               Interval domain, Binding params)
    : expr_(std::move(expr)),
      var_(std::move(var)),
      domain_(domain),
      params_(std::move(params)) {
  if (!(domain_.lo < domain_.hi))
    throw DomainError("ScalarFunction: empty interval");
  for (const auto& name : expr_.variables()) {
    if (name != var_ && !params_.count(name))
      throw DomainError("ScalarFunction: unbound name '" + name + "'");
  }
}

ScalarFunction ScalarFunction::parse(const std::string& text, std::string var,
                                     Interval domain, Binding params) {
  std::set<std::string> names{var};
  for (const auto& [k, v] : params) names.insert(k);
  Expression e = parse_expression(text, names);
  return ScalarFunction(std::move(e), std::move(var), domain, std::move(params));
}

double ScalarFunction::operator()(double x) const {
  if (x < domain_.lo || x > domain_.hi)
    throw DomainError("evaluation outside domain of " + expr_.str());
  Binding b = params_;
  b[var_] = x;
  return expr_.eval(b);
}

ScalarFunction ScalarFunction::derivative() const {
  return ScalarFunction(expr_.diff(var_).simplified(), var_, domain_, params_);
}

}  // namespace sundman
