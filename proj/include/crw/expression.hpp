#ifndef CRW_EXPRESSION_HPP
#define CRW_EXPRESSION_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crw/error.hpp"

namespace crw {

/// Small arithmetic expression in prefix (S-expression) form, used for
/// custom scheduling-field components:
///
///   (+ 1 (sin x1))      (* 2 x1 x2)      (pow x2 0.5)      (exp x1)
///
/// Coordinates are 1-based (x1 .. xm). Operators: + - * / pow exp log
/// sin cos sqrt. `+` and `*` take any number of arguments, `-` one or two.
class Expression {
 public:
  static Expression parse(std::string_view text) {
    Expression e;
    e.source_ = std::string(text);
    std::size_t pos = 0;
    e.root_ = e.parse_node(text, pos);
    skip_space(text, pos);
    if (pos != text.size()) throw parse_error(text, pos, "trailing input");
    return e;
  }

  double evaluate(std::span<const double> x) const {
    const double v = eval(root_, x);
    if (!std::isfinite(v))
      throw Error(ErrorCode::EvaluationError, "expression '" + source_ + "' is not finite at the given state");
    return v;
  }

  /// Largest coordinate index referenced (1-based), 0 if none.
  std::size_t max_variable() const {
    std::size_t best = 0;
    for (const auto& n : nodes_)
      if (n.op == Op::Var) best = std::max(best, n.index + 1);
    return best;
  }

  const std::string& source() const noexcept { return source_; }

 private:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Exp, Log, Sin, Cos, Sqrt };

  struct Node {
    Op op = Op::Const;
    double value = 0.0;
    std::size_t index = 0;
    std::vector<std::size_t> args;
  };

  static void skip_space(std::string_view t, std::size_t& pos) {
    while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
  }

  static Error parse_error(std::string_view t, std::size_t pos, const std::string& why) {
    return Error(ErrorCode::ConfigParseError,
                 "expression '" + std::string(t) + "' at offset " + std::to_string(pos) + ": " + why);
  }

  static std::string_view token(std::string_view t, std::size_t& pos) {
    skip_space(t, pos);
    const std::size_t start = pos;
    while (pos < t.size() && !std::isspace(static_cast<unsigned char>(t[pos])) && t[pos] != '(' && t[pos] != ')') ++pos;
    return t.substr(start, pos - start);
  }

  std::size_t add(Node n) {
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  std::size_t parse_node(std::string_view t, std::size_t& pos) {
    skip_space(t, pos);
    if (pos >= t.size()) throw parse_error(t, pos, "unexpected end");
    if (t[pos] == ')') throw parse_error(t, pos, "unexpected ')'");
    if (t[pos] != '(') return parse_atom(t, pos);
    ++pos;
    const auto name = token(t, pos);
    Node n;
    if (name == "+") n.op = Op::Add;
    else if (name == "-") n.op = Op::Sub;
    else if (name == "*") n.op = Op::Mul;
    else if (name == "/") n.op = Op::Div;
    else if (name == "pow") n.op = Op::Pow;
    else if (name == "exp") n.op = Op::Exp;
    else if (name == "log") n.op = Op::Log;
    else if (name == "sin") n.op = Op::Sin;
    else if (name == "cos") n.op = Op::Cos;
    else if (name == "sqrt") n.op = Op::Sqrt;
    else throw parse_error(t, pos, "unknown operator '" + std::string(name) + "'");
    for (;;) {
      skip_space(t, pos);
      if (pos >= t.size()) throw parse_error(t, pos, "missing ')'");
      if (t[pos] == ')') {
        ++pos;
        break;
      }
      n.args.push_back(parse_node(t, pos));
    }
    const std::size_t argc = n.args.size();
    bool ok = true;
    switch (n.op) {
      case Op::Add:
      case Op::Mul: ok = argc >= 1; break;
      case Op::Sub: ok = argc == 1 || argc == 2; break;
      case Op::Div:
      case Op::Pow: ok = argc == 2; break;
      default: ok = argc == 1; break;
    }
    if (!ok) throw parse_error(t, pos, "wrong number of arguments for '" + std::string(name) + "'");
    return add(std::move(n));
  }

  std::size_t parse_atom(std::string_view t, std::size_t& pos) {
    const std::size_t start = pos;
    const auto tok = token(t, pos);
    if (tok.empty()) throw parse_error(t, start, "empty token");
    Node n;
    if (tok[0] == 'x') {
      const std::string digits(tok.substr(1));
      char* end = nullptr;
      const long idx = std::strtol(digits.c_str(), &end, 10);
      if (digits.empty() || *end != '\0' || idx < 1) throw parse_error(t, start, "bad coordinate '" + std::string(tok) + "'");
      n.op = Op::Var;
      n.index = static_cast<std::size_t>(idx - 1);
      return add(std::move(n));
    }
    const std::string text(tok);
    char* end = nullptr;
    n.value = std::strtod(text.c_str(), &end);
    if (*end != '\0') throw parse_error(t, start, "bad number '" + text + "'");
    return add(std::move(n));
  }

  double eval(std::size_t id, std::span<const double> x) const {
    const Node& n = nodes_[id];
    auto arg = [&](std::size_t k) { return eval(n.args[k], x); };
    switch (n.op) {
      case Op::Const: return n.value;
      case Op::Var:
        if (n.index >= x.size())
          throw Error(ErrorCode::DimensionMismatch,
                      "expression uses x" + std::to_string(n.index + 1) + " but state has " + std::to_string(x.size()) + " queues");
        return x[n.index];
      case Op::Add: {
        double s = 0.0;
        for (std::size_t k = 0; k < n.args.size(); ++k) s += arg(k);
        return s;
      }
      case Op::Mul: {
        double p = 1.0;
        for (std::size_t k = 0; k < n.args.size(); ++k) p *= arg(k);
        return p;
      }
      case Op::Sub: return n.args.size() == 1 ? -arg(0) : arg(0) - arg(1);
      case Op::Div: return arg(0) / arg(1);
      case Op::Pow: return std::pow(arg(0), arg(1));
      case Op::Exp: return std::exp(arg(0));
      case Op::Log: return std::log(arg(0));
      case Op::Sin: return std::sin(arg(0));
      case Op::Cos: return std::cos(arg(0));
      case Op::Sqrt: return std::sqrt(arg(0));
    }
    return 0.0;
  }

  std::string source_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

}  // namespace crw

#endif  // CRW_EXPRESSION_HPP
