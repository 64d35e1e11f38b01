#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sundman {

/// Variable binding used when evaluating expressions.
using Binding = std::map<std::string, double>;

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

struct EvalError : std::runtime_error {
  EvalError(const std::string& msg, std::string subexpr)
      : std::runtime_error(msg + " in `" + subexpr + "`"),
        subexpr(std::move(subexpr)) {}
  std::string subexpr;
};

enum class ExprKind { Const, Var, Unary, Binary };
enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class UnOp { Neg, Exp, Log, Sin, Cos, Tan, Cot, Sqrt, Abs, Sign };

/// Immutable symbolic expression over named real variables.
///
/// Nodes are shared; all operations return new trees. Differentiation is
/// exact; simplification folds constants and neutral elements only, so
/// semantic equality of two expressions is a sampling question, not a
/// syntactic one.
class Expression {
 public:
  Expression();  // the zero expression

  static Expression constant(double v);
  static Expression variable(std::string name);
  static Expression unary(UnOp op, Expression arg);
  static Expression binary(BinOp op, Expression lhs, Expression rhs);

  double eval(const Binding& binding) const;
  Expression diff(const std::string& var) const;
  Expression simplified() const;
  Expression substitute(const std::string& var, const Expression& repl) const;
  std::set<std::string> variables() const;
  std::string str() const;

  ExprKind kind() const;
  double value() const;              // Const only
  const std::string& name() const;   // Var only
  UnOp un_op() const;                // Unary only
  BinOp bin_op() const;              // Binary only
  Expression arg() const;            // Unary only
  Expression lhs() const;            // Binary only
  Expression rhs() const;            // Binary only

  bool is_constant() const { return kind() == ExprKind::Const; }
  bool is_zero() const { return is_constant() && value() == 0.0; }

  struct Node;

 private:
  explicit Expression(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
  friend Expression make_expr(std::shared_ptr<const Expression::Node>);
};

Expression operator+(Expression a, Expression b);
Expression operator-(Expression a, Expression b);
Expression operator*(Expression a, Expression b);
Expression operator/(Expression a, Expression b);
Expression operator-(Expression a);
Expression pow(Expression base, Expression exponent);
Expression exp(Expression a);
Expression log(Expression a);
Expression sin(Expression a);
Expression cos(Expression a);
Expression tan(Expression a);
Expression cot(Expression a);
Expression sqrt(Expression a);
Expression abs(Expression a);
Expression sign(Expression a);

/// Parses `text` against the fixed grammar. Identifiers other than the
/// reserved function names must be members of `variables`.
Expression parse_expression(std::string_view text,
                            const std::set<std::string>& variables);

}  // namespace sundman
