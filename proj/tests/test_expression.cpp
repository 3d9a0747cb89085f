#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ergoinv/error.hpp"
#include "ergoinv/expression.hpp"

using namespace ergoinv;

namespace {

double eval(const std::string& text, std::vector<double> vars = {}) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < vars.size(); ++i) names.push_back("x" + std::to_string(i + 1));
  return Expression::compile(text, names)(vars);
}

}  // namespace

TEST(Expression, Precedence) {
  EXPECT_DOUBLE_EQ(eval("1 + 2*3"), 7.0);
  EXPECT_DOUBLE_EQ(eval("(1 + 2)*3"), 9.0);
  EXPECT_DOUBLE_EQ(eval("2^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(eval("-2^2"), -4.0);
  EXPECT_DOUBLE_EQ(eval("8/4/2"), 1.0);
  EXPECT_DOUBLE_EQ(eval("1e-3 * 2"), 2e-3);
}

TEST(Expression, ConstantsAndFunctions) {
  EXPECT_DOUBLE_EQ(eval("pi"), std::numbers::pi);
  EXPECT_DOUBLE_EQ(eval("e"), std::numbers::e);
  EXPECT_DOUBLE_EQ(eval("sqrt(2*(2 + x1^2))", {1.5}), std::sqrt(2.0 * (2.0 + 2.25)));
  EXPECT_DOUBLE_EQ(eval("-2*x1/(1 + x1^2)", {3.0}), -0.6);
  EXPECT_NEAR(eval("exp(log(5)) + atan(1)*4 + abs(-1) + tanh(0)"), 5.0 + std::numbers::pi + 1.0, 1e-14);
}

TEST(Expression, Variables) {
  EXPECT_DOUBLE_EQ(eval("x1*x2 - x2", {3.0, 4.0}), 8.0);
  const auto e = Expression::compile("x^2", coordinate_names(1));
  const double x = 1.5;
  EXPECT_DOUBLE_EQ(e(std::span<const double>(&x, 1)), 2.25);
}

TEST(Expression, ErrorsCarryColumn) {
  try {
    Expression::compile("1 + y", {"x"});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
  }
  EXPECT_THROW(Expression::compile("1 +", {}), Error);
  EXPECT_THROW(Expression::compile("(1", {}), Error);
  EXPECT_THROW(Expression::compile("foo(1)", {}), Error);
}

TEST(Expression, SplitList) {
  EXPECT_EQ(split_list(" a ; b;c ", ';'), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(coordinate_names(3), (std::vector<std::string>{"x1", "x2", "x3"}));
}
