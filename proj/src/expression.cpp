#include "xfg/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "xfg/errors.hpp"

namespace xfg {

enum class Op { constant, variable, add, sub, mul, div, pow, neg, abs, sqrt, exp, log, sin, cos, tanh, sign };

struct Expression::Node {
  Op op = Op::constant;
  double value = 0.0;
  int var = -1;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::constant;
  n->value = v;
  return n;
}

NodePtr make_var(int slot) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::variable;
  n->var = slot;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }

NodePtr make_unary(Op op, NodePtr a) {
  if (op == Op::neg && a->op == Op::constant) return make_const(-a->value);
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  switch (op) {
    case Op::add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make_unary(Op::neg, b);
      break;
    case Op::mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case Op::div:
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case Op::pow:
      if (is_const(b, 1.0)) return a;
      if (is_const(b, 0.0)) return make_const(1.0);
      break;
    default:
      break;
  }
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double eval_node(const Expression::Node& n, std::span<const double> vars) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return vars[static_cast<std::size_t>(n.var)];
    case Op::add: return eval_node(*n.a, vars) + eval_node(*n.b, vars);
    case Op::sub: return eval_node(*n.a, vars) - eval_node(*n.b, vars);
    case Op::mul: return eval_node(*n.a, vars) * eval_node(*n.b, vars);
    case Op::div: return eval_node(*n.a, vars) / eval_node(*n.b, vars);
    case Op::pow: {
      const double base = eval_node(*n.a, vars);
      if (n.b->op == Op::constant && n.b->value == 2.0) return base * base;
      return std::pow(base, eval_node(*n.b, vars));
    }
    case Op::neg: return -eval_node(*n.a, vars);
    case Op::abs: return std::fabs(eval_node(*n.a, vars));
    case Op::sqrt: return std::sqrt(eval_node(*n.a, vars));
    case Op::exp: return std::exp(eval_node(*n.a, vars));
    case Op::log: return std::log(eval_node(*n.a, vars));
    case Op::sin: return std::sin(eval_node(*n.a, vars));
    case Op::cos: return std::cos(eval_node(*n.a, vars));
    case Op::tanh: return std::tanh(eval_node(*n.a, vars));
    case Op::sign: {
      const double v = eval_node(*n.a, vars);
      return static_cast<double>((v > 0.0) - (v < 0.0));
    }
  }
  return 0.0;
}

bool node_depends(const Expression::Node& n, int var) {
  if (n.op == Op::variable) return n.var == var;
  if (n.op == Op::constant) return false;
  return (n.a && node_depends(*n.a, var)) || (n.b && node_depends(*n.b, var));
}

bool has_variable(const Expression::Node& n) {
  if (n.op == Op::variable) return true;
  return (n.a && has_variable(*n.a)) || (n.b && has_variable(*n.b));
}

NodePtr differentiate(const NodePtr& n, int var) {
  if (!node_depends(*n, var)) return make_const(0.0);
  const NodePtr& a = n->a;
  const NodePtr& b = n->b;
  switch (n->op) {
    case Op::constant: return make_const(0.0);
    case Op::variable: return make_const(1.0);
    case Op::add: return make_binary(Op::add, differentiate(a, var), differentiate(b, var));
    case Op::sub: return make_binary(Op::sub, differentiate(a, var), differentiate(b, var));
    case Op::mul:
      return make_binary(Op::add, make_binary(Op::mul, differentiate(a, var), b),
                         make_binary(Op::mul, a, differentiate(b, var)));
    case Op::div: {
      // (a'b - ab') / b^2
      NodePtr num = make_binary(Op::sub, make_binary(Op::mul, differentiate(a, var), b),
                                make_binary(Op::mul, a, differentiate(b, var)));
      return make_binary(Op::div, num, make_binary(Op::mul, b, b));
    }
    case Op::pow: {
      if (!node_depends(*b, var)) {
        // b a^(b-1) a'
        NodePtr reduced = make_binary(Op::sub, b, make_const(1.0));
        if (b->op == Op::constant) reduced = make_const(b->value - 1.0);
        return make_binary(Op::mul, make_binary(Op::mul, b, make_binary(Op::pow, a, reduced)),
                           differentiate(a, var));
      }
      // a^b (b' log a + b a'/a)
      NodePtr t1 = make_binary(Op::mul, differentiate(b, var), make_unary(Op::log, a));
      NodePtr t2 = make_binary(Op::div, make_binary(Op::mul, b, differentiate(a, var)), a);
      return make_binary(Op::mul, n, make_binary(Op::add, t1, t2));
    }
    case Op::neg: return make_unary(Op::neg, differentiate(a, var));
    case Op::abs: return make_binary(Op::mul, make_unary(Op::sign, a), differentiate(a, var));
    case Op::sqrt:
      return make_binary(Op::div, differentiate(a, var), make_binary(Op::mul, make_const(2.0), n));
    case Op::exp: return make_binary(Op::mul, n, differentiate(a, var));
    case Op::log: return make_binary(Op::div, differentiate(a, var), a);
    case Op::sin: return make_binary(Op::mul, make_unary(Op::cos, a), differentiate(a, var));
    case Op::cos:
      return make_unary(Op::neg, make_binary(Op::mul, make_unary(Op::sin, a), differentiate(a, var)));
    case Op::tanh:
      return make_binary(Op::mul, make_binary(Op::sub, make_const(1.0), make_binary(Op::mul, n, n)),
                         differentiate(a, var));
    case Op::sign: return make_const(0.0);
  }
  return make_const(0.0);
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& names, ExprOptions options)
      : text_(text), names_(names), options_(options) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    std::ostringstream os;
    os << "expression \"" << text_ << "\" column " << (pos_ + 1) << ": " << message;
    throw ConfigError(os.str());
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept("+"))
        n = make_binary(Op::add, n, term());
      else if (accept("-"))
        n = make_binary(Op::sub, n, term());
      else
        return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      skip_space();
      if (text_.substr(pos_, 2) == "**") return n;
      if (accept("*")) {
        n = make_binary(Op::mul, n, unary());
      } else if (accept("/")) {
        if (options_.polynomial_only) fail("division is not allowed here");
        n = make_binary(Op::div, n, unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (accept("-")) return make_unary(Op::neg, unary());
    if (accept("+")) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept("**") || accept("^")) {
      const std::size_t at = pos_;
      NodePtr exponent = unary();
      if (options_.polynomial_only) {
        const bool ok = exponent->op == Op::constant && exponent->value >= 0.0 &&
                        std::floor(exponent->value) == exponent->value;
        if (!ok) {
          pos_ = at;
          fail("only non-negative integer powers are allowed here");
        }
      }
      return make_binary(Op::pow, base, exponent);
    }
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!accept(")")) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    return make_const(v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string id(text_.substr(start, pos_ - start));

    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      static const std::pair<const char*, Op> functions[] = {
          {"abs", Op::abs}, {"sqrt", Op::sqrt}, {"exp", Op::exp},   {"log", Op::log},
          {"sin", Op::sin}, {"cos", Op::cos},   {"tanh", Op::tanh}, {"sign", Op::sign}};
      for (const auto& [fname, op] : functions) {
        if (id == fname) {
          if (options_.polynomial_only) {
            pos_ = start;
            fail("function calls are not allowed here");
          }
          ++pos_;
          NodePtr arg = expr();
          if (!accept(")")) fail("expected ')'");
          return make_unary(op, arg);
        }
      }
      pos_ = start;
      fail("unknown function '" + id + "'");
    }

    if (id == "pi") return make_const(std::numbers::pi);
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == id) return make_var(static_cast<int>(i));
    pos_ = start;
    std::string allowed;
    for (const auto& n : names_) allowed += (allowed.empty() ? "" : ", ") + n;
    fail("unknown variable '" + id + "' (allowed: " + (allowed.empty() ? "none" : allowed) + ")");
  }

  std::string_view text_;
  const std::vector<std::string>& names_;
  ExprOptions options_;
  std::size_t pos_ = 0;
};

std::string render(const Expression::Node& n) {
  auto bin = [&](const char* op) { return "(" + render(*n.a) + op + render(*n.b) + ")"; };
  auto fn = [&](const char* name) { return std::string(name) + "(" + render(*n.a) + ")"; };
  switch (n.op) {
    case Op::constant: {
      std::ostringstream os;
      os.precision(17);
      os << n.value;
      return os.str();
    }
    case Op::variable: return "$" + std::to_string(n.var);
    case Op::add: return bin("+");
    case Op::sub: return bin("-");
    case Op::mul: return bin("*");
    case Op::div: return bin("/");
    case Op::pow: return bin("^");
    case Op::neg: return "(-" + render(*n.a) + ")";
    case Op::abs: return fn("abs");
    case Op::sqrt: return fn("sqrt");
    case Op::exp: return fn("exp");
    case Op::log: return fn("log");
    case Op::sin: return fn("sin");
    case Op::cos: return fn("cos");
    case Op::tanh: return fn("tanh");
    case Op::sign: return fn("sign");
  }
  return "?";
}

}  // namespace

Expression::Expression() : root_(make_const(0.0)), text_("0") {}

Expression::Expression(std::shared_ptr<const Node> root, std::string text)
    : root_(std::move(root)), text_(std::move(text)) {}

Expression Expression::parse(std::string_view text, const std::vector<std::string>& variables,
                             ExprOptions options) {
  Parser parser(text, variables, options);
  return Expression(parser.parse(), std::string(text));
}

Expression Expression::constant(double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  return Expression(make_const(value), os.str());
}

double Expression::eval(std::span<const double> vars) const { return eval_node(*root_, vars); }

Expression Expression::derivative(int var) const {
  NodePtr d = differentiate(root_, var);
  return Expression(d, render(*d));
}

bool Expression::depends_on(int var) const { return node_depends(*root_, var); }

bool Expression::is_constant() const { return !has_variable(*root_); }

std::vector<std::string> indexed_names(std::string_view prefix, int count) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) names.push_back(std::string(prefix) + std::to_string(i));
  return names;
}

std::vector<std::string> concat_names(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace xfg
