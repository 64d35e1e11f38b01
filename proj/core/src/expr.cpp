#include "sundman/expr.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace sundman {

struct Expression::Node {
  ExprKind kind;
  double value = 0.0;
  std::string name;
  UnOp uop{};
  BinOp bop{};
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = ExprKind::Const;
  n->value = v;
  return n;
}

}  // namespace

Expression make_expr(NodePtr n) { return Expression(std::move(n)); }

Expression::Expression() : node_(make_const(0.0)) {}

Expression Expression::constant(double v) { return make_expr(make_const(v)); }

Expression Expression::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Var;
  n->name = std::move(name);
  return make_expr(n);
}

Expression Expression::unary(UnOp op, Expression arg) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Unary;
  n->uop = op;
  n->a = arg.node_;
  return make_expr(n);
}

Expression Expression::binary(BinOp op, Expression lhs, Expression rhs) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Binary;
  n->bop = op;
  n->a = lhs.node_;
  n->b = rhs.node_;
  return make_expr(n);
}

ExprKind Expression::kind() const { return node_->kind; }
double Expression::value() const { return node_->value; }
const std::string& Expression::name() const { return node_->name; }
UnOp Expression::un_op() const { return node_->uop; }
BinOp Expression::bin_op() const { return node_->bop; }
Expression Expression::arg() const { return make_expr(node_->a); }
Expression Expression::lhs() const { return make_expr(node_->a); }
Expression Expression::rhs() const { return make_expr(node_->b); }

Expression operator+(Expression a, Expression b) {
  return Expression::binary(BinOp::Add, std::move(a), std::move(b));
}
Expression operator-(Expression a, Expression b) {
  return Expression::binary(BinOp::Sub, std::move(a), std::move(b));
}
Expression operator*(Expression a, Expression b) {
  return Expression::binary(BinOp::Mul, std::move(a), std::move(b));
}
Expression operator/(Expression a, Expression b) {
  return Expression::binary(BinOp::Div, std::move(a), std::move(b));
}
Expression operator-(Expression a) {
  return Expression::unary(UnOp::Neg, std::move(a));
}
Expression pow(Expression base, Expression exponent) {
  return Expression::binary(BinOp::Pow, std::move(base), std::move(exponent));
}
Expression exp(Expression a) { return Expression::unary(UnOp::Exp, std::move(a)); }
Expression log(Expression a) { return Expression::unary(UnOp::Log, std::move(a)); }
Expression sin(Expression a) { return Expression::unary(UnOp::Sin, std::move(a)); }
Expression cos(Expression a) { return Expression::unary(UnOp::Cos, std::move(a)); }
Expression tan(Expression a) { return Expression::unary(UnOp::Tan, std::move(a)); }
Expression cot(Expression a) { return Expression::unary(UnOp::Cot, std::move(a)); }
Expression sqrt(Expression a) { return Expression::unary(UnOp::Sqrt, std::move(a)); }
Expression abs(Expression a) { return Expression::unary(UnOp::Abs, std::move(a)); }
Expression sign(Expression a) { return Expression::unary(UnOp::Sign, std::move(a)); }

namespace {

[[noreturn]] void eval_fail(const char* msg, const Expression::Node& n);

std::string node_str(const Expression::Node& n);

double eval_node(const Expression::Node& n, const Binding& binding) {
  switch (n.kind) {
    case ExprKind::Const:
      return n.value;
    case ExprKind::Var: {
      auto it = binding.find(n.name);
      if (it == binding.end()) eval_fail("unbound variable", n);
      return it->second;
    }
    case ExprKind::Unary: {
      const double u = eval_node(*n.a, binding);
      double r = 0.0;
      switch (n.uop) {
        case UnOp::Neg: r = -u; break;
        case UnOp::Exp: r = std::exp(u); break;
        case UnOp::Log:
          if (u <= 0.0) eval_fail("log of nonpositive argument", n);
          r = std::log(u);
          break;
        case UnOp::Sin: r = std::sin(u); break;
        case UnOp::Cos: r = std::cos(u); break;
        case UnOp::Tan:
          r = std::tan(u);
          if (!std::isfinite(r)) eval_fail("tan pole", n);
          break;
        case UnOp::Cot: {
          const double s = std::sin(u);
          if (s == 0.0) eval_fail("cot pole", n);
          r = std::cos(u) / s;
          break;
        }
        case UnOp::Sqrt:
          if (u < 0.0) eval_fail("sqrt of negative argument", n);
          r = std::sqrt(u);
          break;
        case UnOp::Abs: r = std::fabs(u); break;
        case UnOp::Sign: r = (u > 0.0) - (u < 0.0); break;
      }
      if (!std::isfinite(r)) eval_fail("non-finite result", n);
      return r;
    }
    case ExprKind::Binary: {
      const double x = eval_node(*n.a, binding);
      const double y = eval_node(*n.b, binding);
      double r = 0.0;
      switch (n.bop) {
        case BinOp::Add: r = x + y; break;
        case BinOp::Sub: r = x - y; break;
        case BinOp::Mul: r = x * y; break;
        case BinOp::Div:
          if (y == 0.0) eval_fail("division by zero", n);
          r = x / y;
          break;
        case BinOp::Pow:
          r = std::pow(x, y);
          break;
      }
      if (!std::isfinite(r)) eval_fail("non-finite result", n);
      return r;
    }
  }
  eval_fail("corrupt node", n);
}

int precedence(const Expression::Node& n) {
  if (n.kind == ExprKind::Binary) {
    switch (n.bop) {
      case BinOp::Add:
      case BinOp::Sub: return 1;
      case BinOp::Mul:
      case BinOp::Div: return 2;
      case BinOp::Pow: return 4;
    }
  }
  if (n.kind == ExprKind::Unary && n.uop == UnOp::Neg) return 3;
  return 5;
}

const char* fn_name(UnOp op) {
  switch (op) {
    case UnOp::Exp: return "exp";
    case UnOp::Log: return "log";
    case UnOp::Sin: return "sin";
    case UnOp::Cos: return "cos";
    case UnOp::Tan: return "tan";
    case UnOp::Cot: return "cot";
    case UnOp::Sqrt: return "sqrt";
    case UnOp::Abs: return "abs";
    case UnOp::Sign: return "sign";
    case UnOp::Neg: return "-";
  }
  return "?";
}

void print_node(std::ostream& os, const Expression::Node& n, int parent_prec) {
  const int prec = precedence(n);
  const bool parens = prec < parent_prec;
  if (parens) os << '(';
  switch (n.kind) {
    case ExprKind::Const: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      if (n.value < 0.0) {
        os << '(' << buf << ')';
      } else {
        os << buf;
      }
      break;
    }
    case ExprKind::Var:
      os << n.name;
      break;
    case ExprKind::Unary:
      if (n.uop == UnOp::Neg) {
        os << '-';
        print_node(os, *n.a, 3 + 1);  // force parens around lower-prec args
      } else {
        os << fn_name(n.uop) << '(';
        print_node(os, *n.a, 0);
        os << ')';
      }
      break;
    case ExprKind::Binary: {
      const char* op = "?";
      switch (n.bop) {
        case BinOp::Add: op = "+"; break;
        case BinOp::Sub: op = "-"; break;
        case BinOp::Mul: op = "*"; break;
        case BinOp::Div: op = "/"; break;
        case BinOp::Pow: op = "^"; break;
      }
      if (n.bop == BinOp::Pow) {
        // grammar: factor := unary ("^" factor)?  -- right associative
        print_node(os, *n.a, prec + 1);
        os << op;
        print_node(os, *n.b, prec);
      } else {
        print_node(os, *n.a, prec);
        os << op;
        // "-" and "/" do not associate on the right
        print_node(os, *n.b, prec + 1);
      }
      break;
    }
  }
  if (parens) os << ')';
}

std::string node_str(const Expression::Node& n) {
  std::ostringstream os;
  print_node(os, n, 0);
  return os.str();
}

[[noreturn]] void eval_fail(const char* msg, const Expression::Node& n) {
  throw EvalError(msg, node_str(n));
}

void collect_vars(const Expression::Node& n, std::set<std::string>& out) {
  switch (n.kind) {
    case ExprKind::Const: return;
    case ExprKind::Var: out.insert(n.name); return;
    case ExprKind::Unary: collect_vars(*n.a, out); return;
    case ExprKind::Binary:
      collect_vars(*n.a, out);
      collect_vars(*n.b, out);
      return;
  }
}

}  // namespace

double Expression::eval(const Binding& binding) const {
  return eval_node(*node_, binding);
}

std::set<std::string> Expression::variables() const {
  std::set<std::string> out;
  collect_vars(*node_, out);
  return out;
}

std::string Expression::str() const { return node_str(*node_); }

Expression Expression::substitute(const std::string& var,
                                  const Expression& repl) const {
  switch (kind()) {
    case ExprKind::Const:
      return *this;
    case ExprKind::Var:
      return name() == var ? repl : *this;
    case ExprKind::Unary:
      return unary(un_op(), arg().substitute(var, repl));
    case ExprKind::Binary:
      return binary(bin_op(), lhs().substitute(var, repl),
                    rhs().substitute(var, repl));
  }
  return *this;
}

Expression Expression::diff(const std::string& var) const {
  const Expression zero = constant(0.0);
  const Expression one = constant(1.0);
  switch (kind()) {
    case ExprKind::Const:
      return zero;
    case ExprKind::Var:
      return name() == var ? one : zero;
    case ExprKind::Unary: {
      const Expression u = arg();
      const Expression du = u.diff(var);
      switch (un_op()) {
        case UnOp::Neg: return -du;
        case UnOp::Exp: return exp(u) * du;
        case UnOp::Log: return du / u;
        case UnOp::Sin: return cos(u) * du;
        case UnOp::Cos: return -(sin(u) * du);
        case UnOp::Tan: return (one + tan(u) * tan(u)) * du;
        case UnOp::Cot: return -((one + cot(u) * cot(u)) * du);
        case UnOp::Sqrt: return du / (constant(2.0) * sqrt(u));
        case UnOp::Abs: return sign(u) * du;   // valid away from zeros of u
        case UnOp::Sign: return zero;          // ditto
      }
      return zero;
    }
    case ExprKind::Binary: {
      const Expression f = lhs();
      const Expression g = rhs();
      const Expression df = f.diff(var);
      const Expression dg = g.diff(var);
      switch (bin_op()) {
        case BinOp::Add: return df + dg;
        case BinOp::Sub: return df - dg;
        case BinOp::Mul: return df * g + f * dg;
        case BinOp::Div: return (df * g - f * dg) / (g * g);
        case BinOp::Pow:
          if (g.is_constant()) {
            const double c = g.value();
            if (c == 0.0) return zero;
            return constant(c) * pow(f, constant(c - 1.0)) * df;
          }
          // u^v = exp(v log u)
          return pow(f, g) * (dg * log(f) + g * df / f);
      }
      return zero;
    }
  }
  return zero;
}

namespace {

Expression simplify_rec(const Expression& e) {
  switch (e.kind()) {
    case ExprKind::Const:
    case ExprKind::Var:
      return e;
    case ExprKind::Unary: {
      Expression a = simplify_rec(e.arg());
      if (a.is_constant()) {
        // fold only when the value is defined and finite
        try {
          const double v = Expression::unary(e.un_op(), a).eval({});
          return Expression::constant(v);
        } catch (const EvalError&) {
        }
      }
      if (e.un_op() == UnOp::Neg && a.kind() == ExprKind::Unary &&
          a.un_op() == UnOp::Neg) {
        return a.arg();
      }
      return Expression::unary(e.un_op(), a);
    }
    case ExprKind::Binary: {
      Expression a = simplify_rec(e.lhs());
      Expression b = simplify_rec(e.rhs());
      if (a.is_constant() && b.is_constant()) {
        try {
          const double v = Expression::binary(e.bin_op(), a, b).eval({});
          return Expression::constant(v);
        } catch (const EvalError&) {
        }
      }
      switch (e.bin_op()) {
        case BinOp::Add:
          if (a.is_zero()) return b;
          if (b.is_zero()) return a;
          break;
        case BinOp::Sub:
          if (b.is_zero()) return a;
          if (a.is_zero()) return -b;
          break;
        case BinOp::Mul:
          if (a.is_zero() || b.is_zero()) return Expression::constant(0.0);
          if (a.is_constant() && a.value() == 1.0) return b;
          if (b.is_constant() && b.value() == 1.0) return a;
          break;
        case BinOp::Div:
          if (a.is_zero() && !(b.is_constant() && b.value() == 0.0))
            return Expression::constant(0.0);
          if (b.is_constant() && b.value() == 1.0) return a;
          break;
        case BinOp::Pow:
          if (b.is_constant() && b.value() == 0.0) return Expression::constant(1.0);
          if (b.is_constant() && b.value() == 1.0) return a;
          break;
      }
      return Expression::binary(e.bin_op(), a, b);
    }
  }
  return e;
}

}  // namespace

Expression Expression::simplified() const { return simplify_rec(*this); }

}  // namespace sundman
