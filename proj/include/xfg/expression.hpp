#pragma once

// Small arithmetic expression language used by configs and the CLI for
// custom coefficient matrices, integrands and scalar fields.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary (('^' | '**') unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Names are bound to slots of the evaluation vector at parse time.  Functions:
// abs, sqrt, exp, log, sin, cos, tanh, sign.  Constant: pi.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xfg {

struct ExprOptions {
  /// Restrict to +, -, *, numeric constants and non-negative integer powers.
  bool polynomial_only = false;
};

class Expression {
 public:
  struct Node;

  Expression();

  /// Throws ConfigError with the offending column on malformed input or an
  /// unknown name.
  static Expression parse(std::string_view text, const std::vector<std::string>& variables,
                          ExprOptions options = {});
  static Expression constant(double value);

  double eval(std::span<const double> vars) const;
  /// Symbolic partial derivative with respect to slot `var`.
  Expression derivative(int var) const;
  bool depends_on(int var) const;
  /// True when no variable occurs.
  bool is_constant() const;

  const std::string& text() const noexcept { return text_; }

 private:
  explicit Expression(std::shared_ptr<const Node> root, std::string text);

  std::shared_ptr<const Node> root_;
  std::string text_;
};

/// "x1".."x<n>"
std::vector<std::string> indexed_names(std::string_view prefix, int count);
/// Concatenation of name lists, in order; slot i of the result is names[i].
std::vector<std::string> concat_names(std::initializer_list<std::vector<std::string>> parts);

}  // namespace xfg
