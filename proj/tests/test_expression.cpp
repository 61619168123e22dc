#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "xfg/errors.hpp"
#include "xfg/expression.hpp"

using xfg::Expression;

namespace {

double eval(const std::string& text, std::vector<double> vars = {},
            std::vector<std::string> names = {"x1", "x2", "x3"}) {
  vars.resize(names.size(), 0.0);
  return Expression::parse(text, names).eval(vars);
}

}  // namespace

TEST(Expression, Precedence) {
  EXPECT_EQ(eval("1 + 2 * 3"), 7.0);
  EXPECT_EQ(eval("(1 + 2) * 3"), 9.0);
  EXPECT_EQ(eval("2 ^ 3 ^ 2"), 512.0);
  EXPECT_EQ(eval("-2^2"), -4.0);
  EXPECT_EQ(eval("2**3"), 8.0);
  EXPECT_EQ(eval("8 / 4 / 2"), 1.0);
}

TEST(Expression, VariablesAndFunctions) {
  EXPECT_EQ(eval("x1*x2 + x3", {2, 3, 4}), 10.0);
  EXPECT_DOUBLE_EQ(eval("sin(pi/2) + cos(0) + exp(0) + log(1)"), 3.0);
  EXPECT_EQ(eval("abs(x1) + sqrt(x2)", {-3, 16}), 7.0);
  EXPECT_EQ(eval("sign(x1)", {-0.5}), -1.0);
  EXPECT_DOUBLE_EQ(eval("tanh(0)"), 0.0);
  EXPECT_DOUBLE_EQ(eval("pi"), std::numbers::pi);
}

TEST(Expression, SymbolicDerivativeMatchesFiniteDifference) {
  const std::vector<std::string> names{"x1", "x2"};
  const auto e = Expression::parse("x1^3*sin(x2) + exp(x1*x2) - x2/x1", names);
  const std::vector<double> at{0.7, -1.2};
  for (int var = 0; var < 2; ++var) {
    const auto d = e.derivative(var);
    auto plus = at, minus = at;
    const double h = 1e-6;
    plus[static_cast<std::size_t>(var)] += h;
    minus[static_cast<std::size_t>(var)] -= h;
    const double fd = (e.eval(plus) - e.eval(minus)) / (2 * h);
    EXPECT_NEAR(d.eval(at), fd, 1e-7);
  }
}

TEST(Expression, Dependence) {
  const auto e = Expression::parse("x1 + 0*x2", {"x1", "x2", "x3"});
  EXPECT_TRUE(e.depends_on(0));
  EXPECT_FALSE(e.depends_on(2));
  EXPECT_TRUE(Expression::parse("2*pi", {"x1"}).is_constant());
  EXPECT_TRUE(Expression::constant(4.0).is_constant());
  EXPECT_EQ(Expression::constant(4.0).eval({}), 4.0);
}

TEST(Expression, MalformedInputThrowsConfigError) {
  const std::vector<std::string> names{"x1"};
  for (const char* bad : {"", "1 +", "(x1", "x1 x1", "foo(1)", "y1", "1 $ 2", "sin x1"})
    EXPECT_THROW(Expression::parse(bad, names), xfg::ConfigError) << bad;
}

TEST(Expression, ErrorNamesColumn) {
  try {
    Expression::parse("x1 + y2", {"x1"});
    FAIL();
  } catch (const xfg::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("6"), std::string::npos) << e.what();
  }
}

TEST(Expression, PolynomialOnlyRejectsTranscendentals) {
  xfg::ExprOptions poly;
  poly.polynomial_only = true;
  EXPECT_NO_THROW(Expression::parse("x1^2 - 3*x1 + 1", {"x1"}, poly));
  EXPECT_THROW(Expression::parse("sin(x1)", {"x1"}, poly), xfg::ConfigError);
  EXPECT_THROW(Expression::parse("x1/2", {"x1"}, poly), xfg::ConfigError);
  EXPECT_THROW(Expression::parse("x1^0.5", {"x1"}, poly), xfg::ConfigError);
}

TEST(Expression, NameHelpers) {
  EXPECT_EQ(xfg::indexed_names("eta", 2), (std::vector<std::string>{"eta1", "eta2"}));
  EXPECT_EQ(xfg::concat_names({{"a"}, {"b", "c"}}), (std::vector<std::string>{"a", "b", "c"}));
}
