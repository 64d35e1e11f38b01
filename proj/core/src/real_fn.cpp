#include "sundman/real_fn.hpp"

namespace sundman {

namespace {

Fn1 evaluator(const Expression& e, const std::string& var, Binding params) {
  return [e, var, params = std::move(params)](double x) {
    Binding b = params;
    b[var] = x;
    return e.eval(b);
  };
}

}  // namespace

double RealFn::d1(double x) const {
  if (!df) throw DomainError("RealFn: first derivative unavailable");
  return df(x);
}
double RealFn::d2(double x) const {
  if (!d2f) throw DomainError("RealFn: second derivative unavailable");
  return d2f(x);
}
double RealFn::d3(double x) const {
  if (!d3f) throw DomainError("RealFn: third derivative unavailable");
  return d3f(x);
}

RealFn RealFn::from_expression(const Expression& e, std::string var,
                               Interval domain, Binding params) {
  RealFn r;
  const Expression d1e = e.diff(var).simplified();
  const Expression d2e = d1e.diff(var).simplified();
  const Expression d3e = d2e.diff(var).simplified();
  r.f = evaluator(e, var, params);
  r.df = evaluator(d1e, var, params);
  r.d2f = evaluator(d2e, var, params);
  r.d3f = evaluator(d3e, var, params);
  r.domain = domain;
  r.closed_form = e;
  r.var = var;
  r.params = std::move(params);
  return r;
}

RealFn RealFn::from_scalar(const ScalarFunction& s) {
  return from_expression(s.expr(), s.var(), s.domain(), s.params());
}

RealFn RealFn::constant(double c, Interval domain) {
  return from_expression(Expression::constant(c), "x", domain);
}

RealFn RealFn::identity(Interval domain) {
  return from_expression(Expression::variable("x"), "x", domain);
}

}  // namespace sundman
