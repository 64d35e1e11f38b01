#include <cctype>
#include <cstdlib>

#include "sundman/expr.hpp"

namespace sundman {

namespace {

// Grammar (explicit "*" only, no juxtaposition):
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := unary ("^" factor)?
//   unary  := "-" unary | atom
//   atom   := number | ident | ident "(" expr ")" | "(" expr ")"
class Parser {
 public:
  Parser(std::string_view text, const std::set<std::string>& vars)
      : text_(text), vars_(vars) {}

  Expression run() {
    Expression e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) {
      throw ParseError(
          "unexpected trailing input; juxtaposition is not in the grammar, "
          "use an explicit '*'",
          pos_);
    }
    return e;
  }

 private:
  std::string_view text_;
  const std::set<std::string>& vars_;
  std::size_t pos_ = 0;

  static bool is_reserved(const std::string& id) {
    static const std::set<std::string> kReserved = {
        "exp", "log", "sin", "cos", "tan", "cot", "sqrt", "abs", "sign"};
    return kReserved.count(id) != 0;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "' " + what, pos_);
  }

  Expression parse_expr() {
    Expression e = parse_term();
    for (;;) {
      if (accept('+')) {
        e = e + parse_term();
      } else if (accept('-')) {
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expression parse_term() {
    Expression e = parse_factor();
    for (;;) {
      if (accept('*')) {
        e = e * parse_factor();
      } else if (accept('/')) {
        e = e / parse_factor();
      } else {
        return e;
      }
    }
  }

  Expression parse_factor() {
    Expression base = parse_unary();
    if (accept('^')) return pow(base, parse_factor());
    return base;
  }

  Expression parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_atom();
  }

  Expression parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (accept('(')) {
      Expression e = parse_expr();
      expect(')', "to close parenthesis");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expression parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to a following identifier? not valid; rewind
      }
    }
    const std::string tok(text_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
      throw ParseError("malformed number '" + tok + "'", start);
    return Expression::constant(v);
  }

  Expression parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string id(text_.substr(start, pos_ - start));
    if (is_reserved(id)) {
      if (!accept('(')) {
        throw ParseError("function '" + id +
                             "' requires a parenthesised argument; "
                             "juxtaposition is not in the grammar, use an explicit '*'",
                         start);
      }
      Expression arg = parse_expr();
      expect(')', "to close function argument");
      if (id == "exp") return exp(arg);
      if (id == "log") return log(arg);
      if (id == "sin") return sin(arg);
      if (id == "cos") return cos(arg);
      if (id == "tan") return tan(arg);
      if (id == "cot") return cot(arg);
      if (id == "sqrt") return sqrt(arg);
      if (id == "abs") return abs(arg);
      return sign(arg);
    }
    if (!vars_.count(id))
      throw ParseError("unknown identifier '" + id + "'", start);
    return Expression::variable(id);
  }
};

}  // namespace

Expression parse_expression(std::string_view text,
                            const std::set<std::string>& variables) {
  return Parser(text, variables).run();
}

}  // namespace sundman
