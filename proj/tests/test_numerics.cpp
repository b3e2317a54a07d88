#include <cmath>

#include <gtest/gtest.h>

#include "cornerflow/numerics.hpp"

using namespace cornerflow;

TEST(Numerics, IntegrateMatchesClosedForm) {
  EXPECT_NEAR(numerics::integrate([](double x) { return std::exp(x); }, 0.0, 2.0), std::exp(2.0) - 1.0, 1e-12);
  EXPECT_NEAR(numerics::integrate([](double x) { return 1.0 / x; }, 1.0, 1e6), std::log(1e6), 1e-10);
  EXPECT_NEAR(numerics::integrate([](double x) { return x * x; }, 3.0, 1.0), -26.0 / 3.0, 1e-12);
}

TEST(Numerics, CumulativeIntegralInsideAndBeyondTable) {
  numerics::CumulativeIntegral F([](double s) { return 1.0 / (s * s); }, 1.0, 100.0);
  for (double x : {1.0, 1.5, 7.3, 99.9, 100.0, 400.0, 0.5}) {
    EXPECT_NEAR(F(x), 1.0 - 1.0 / x, 1e-12) << x;
  }
}

TEST(Numerics, BracketedRootAndUpwardBracket) {
  auto f = [](double x) { return x * x * x - 2.0; };
  EXPECT_NEAR(numerics::solve_bracketed(f, 0.0, 2.0, 1e-14), std::cbrt(2.0), 1e-13);
  double b = 1.1;
  ASSERT_TRUE(numerics::bracket_upward([](double x) { return 50.0 - x; }, 1.0, b, 2.0, 1e3));
  EXPECT_GT(b, 50.0);
  b = 1.1;
  EXPECT_FALSE(numerics::bracket_upward([](double x) { return 5e3 - x; }, 1.0, b, 2.0, 1e3));
}

TEST(Numerics, UnbracketedRootIsRangeError) {
  try {
    numerics::solve_bracketed([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::range);
  }
}

TEST(Numerics, Rk4IsFourthOrder) {
  auto rhs = [](double, const std::array<double, 1>& y) { return std::array<double, 1>{-y[0]}; };
  auto solve = [&](int n) {
    std::array<double, 1> y{1.0};
    const double h = 1.0 / n;
    for (int k = 0; k < n; ++k) y = numerics::rk4_step<1>(rhs, k * h, y, h);
    return std::fabs(y[0] - std::exp(-1.0));
  };
  const double order = std::log2(solve(10) / solve(20));
  EXPECT_NEAR(order, 4.0, 0.1);
}

TEST(Numerics, GeomspaceEndpointsExact) {
  const auto v = numerics::geomspace(1.0, 7.0, 13);
  ASSERT_EQ(v.size(), 13u);
  EXPECT_EQ(v.front(), 1.0);
  EXPECT_EQ(v.back(), 7.0);
  for (std::size_t k = 1; k < v.size(); ++k) EXPECT_NEAR(v[k] / v[k - 1], std::pow(7.0, 1.0 / 12.0), 1e-14);
}

TEST(Numerics, InterpLinearClamps) {
  const std::vector<double> x{0.0, 1.0, 3.0}, y{0.0, 2.0, 0.0};
  EXPECT_DOUBLE_EQ(numerics::interp_linear(x, y, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(numerics::interp_linear(x, y, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(numerics::interp_linear(x, y, -1.0), 0.0);
  EXPECT_DOUBLE_EQ(numerics::interp_linear(x, y, 9.0), 0.0);
}
