#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "leakscope/headloss.hpp"
#include "oracles.hpp"

namespace leakscope {
namespace {

std::vector<HeadLossFn> all_variants() {
  return {Linear{0.1}, SignedQuadratic{0.05}, QuadraticPlusLinear{2.0}, PowerLaw{0.3, 1.852}, PowerLaw{1.5, 0.7}};
}

std::vector<double> flow_grid() {
  std::vector<double> out;
  for (int i = -400; i <= 400; ++i) out.push_back(i * 0.25);
  return out;
}

TEST(HeadLoss, EvaluateExamples) {
  EXPECT_DOUBLE_EQ(evaluate(Linear{0.1}, 10.0), 1.0);
  EXPECT_DOUBLE_EQ(evaluate(SignedQuadratic{0.05}, -2.0), -0.2);
  EXPECT_DOUBLE_EQ(evaluate(QuadraticPlusLinear{2.0}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(evaluate(PowerLaw{2.0, 3.0}, -2.0), -16.0);
}

TEST(HeadLoss, InvertExamples) {
  EXPECT_DOUBLE_EQ(invert(Linear{0.2}, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(invert(QuadraticPlusLinear{2.0}, 4.0), 1.0);
  EXPECT_NEAR(invert(QuadraticPlusLinear{4.0}, 4.0), (-1.0 + std::sqrt(5.0)) / 2.0, 1e-15);
  EXPECT_NEAR(invert(QuadraticPlusLinear{4.0}, 4.0), oracle::quadratic_plus_linear_flow(4.0, 4.0), 1e-15);
}

TEST(HeadLoss, DerivativeExamples) {
  EXPECT_DOUBLE_EQ(derivative(SignedQuadratic{0.05}, 2.0), 0.2);
  EXPECT_DOUBLE_EQ(derivative(QuadraticPlusLinear{2.0}, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(derivative(SignedQuadratic{0.05}, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(derivative(Linear{0.3}, -7.0), 0.3);
}

TEST(HeadLoss, PowerLawDerivativeAtZeroFollowsOneSidedLimit) {
  EXPECT_THROW(derivative(PowerLaw{1.0, 0.5}, 0.0), DerivativeError);
  EXPECT_DOUBLE_EQ(derivative(PowerLaw{1.0, 2.0}, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(derivative(PowerLaw{0.7, 1.0}, 0.0), 0.7);
}

TEST(HeadLoss, RejectsNonPositiveParameters) {
  EXPECT_THROW(make_linear(0.0), InvalidArgument);
  EXPECT_THROW(make_signed_quadratic(-1.0), InvalidArgument);
  EXPECT_THROW(make_power_law(1.0, 0.0), InvalidArgument);
  EXPECT_THROW(PipeSet({}), InvalidArgument);
  EXPECT_THROW(PipeSet({Linear{1.0}}, std::vector<double>{-2.0}), InvalidArgument);
}

TEST(HeadLoss, OddStrictlyIncreasingAndZeroAtOrigin) {
  auto const grid = flow_grid();
  for (auto const& u : all_variants()) {
    EXPECT_EQ(evaluate(u, 0.0), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      EXPECT_LT(evaluate(u, grid[i - 1]), evaluate(u, grid[i])) << type_name(u) << " at " << grid[i];
      EXPECT_EQ(evaluate(u, -grid[i]), -evaluate(u, grid[i]));
    }
  }
}

TEST(HeadLoss, InversionRoundTrip) {
  for (auto const& u : all_variants()) {
    for (double q : flow_grid()) {
      EXPECT_LE(std::abs(invert(u, evaluate(u, q)) - q), 1e-10 * std::max(1.0, std::abs(q)))
          << type_name(u) << " q=" << q;
      EXPECT_LE(std::abs(invert_numerically(u, evaluate(u, q)) - q), 1e-10 * std::max(1.0, std::abs(q)))
          << type_name(u) << " q=" << q;
    }
  }
}

TEST(HeadLoss, DerivativeMatchesCentralDifferences) {
  for (auto const& u : all_variants()) {
    for (double q : flow_grid()) {
      if (std::abs(q) < 0.1) continue;  // kinks of |q| at the origin
      double const fd = oracle::central_difference([&](double v) { return evaluate(u, v); }, q, 1e-6 * std::max(1.0, std::abs(q)));
      double const d = derivative(u, q);
      EXPECT_LE(std::abs(d - fd), 1e-5 * std::max(1.0, std::abs(d))) << type_name(u) << " q=" << q;
    }
  }
}

TEST(Admittance, Examples) {
  PipeSet const linear({Linear{0.1}, Linear{0.2}, Linear{0.3}});
  EXPECT_NEAR(admittance_excluding(linear, 1, 1.0), 1.0 / 0.1 + 1.0 / 0.3, 1e-12);
  EXPECT_EQ(admittance_excluding(linear, 0, 0.0), 0.0);

  PipeSet const example2({QuadraticPlusLinear{2}, QuadraticPlusLinear{4}, QuadraticPlusLinear{6}});
  double const expected = oracle::quadratic_plus_linear_flow(4, 4) + oracle::quadratic_plus_linear_flow(6, 4);
  EXPECT_NEAR(admittance_excluding(example2, 0, 4.0), expected, 1e-14);
  EXPECT_NEAR(admittance_excluding(example2, 0, 4.0), 1.0754, 1e-4);

  PipeSet const single({SignedQuadratic{1.0}});
  EXPECT_EQ(admittance_excluding(single, 0, 3.0), 0.0);
  EXPECT_THROW(admittance_excluding(linear, 3, 1.0), IndexError);
}

TEST(Admittance, OddAndIncreasing) {
  PipeSet const pipes({SignedQuadratic{0.05}, QuadraticPlusLinear{2}, PowerLaw{0.3, 1.852}, Linear{0.4}});
  for (std::size_t j = 0; j < pipes.size(); ++j) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double dh = -10.0; dh <= 10.0; dh += 0.125) {
      double const g = admittance_excluding(pipes, j, dh);
      EXPECT_GT(g, prev);
      EXPECT_NEAR(admittance_excluding(pipes, j, -dh), -g, 1e-14 * std::max(1.0, std::abs(g)));
      prev = g;
    }
  }
}

TEST(AdmittanceDerivative, Examples) {
  PipeSet const linear({Linear{0.1}, Linear{0.2}, Linear{0.3}});
  for (double dh : {-3.0, 0.0, 2.5}) {
    EXPECT_NEAR(admittance_derivative_excluding(linear, 1, dh), 1.0 / 0.1 + 1.0 / 0.3, 1e-12);
  }
  PipeSet const example2({QuadraticPlusLinear{2}, QuadraticPlusLinear{4}, QuadraticPlusLinear{6}});
  EXPECT_NEAR(admittance_derivative_excluding(example2, 0, 0.0), 1.0 / 4 + 1.0 / 6, 1e-15);

  PipeSet const quadratic({SignedQuadratic{0.05}, SignedQuadratic{0.1}});
  EXPECT_THROW(admittance_derivative_excluding(quadratic, 0, 0.0), DerivativeError);
}

TEST(AdmittanceDerivative, MatchesFiniteDifferenceOfAdmittance) {
  PipeSet const pipes({SignedQuadratic{0.05}, QuadraticPlusLinear{2}, PowerLaw{0.3, 1.852}});
  for (double dh : {-4.0, -0.5, 0.3, 1.0, 6.0}) {
    for (std::size_t j = 0; j < pipes.size(); ++j) {
      double const fd = oracle::central_difference([&](double v) { return admittance_excluding(pipes, j, v); }, dh, 1e-6);
      EXPECT_NEAR(admittance_derivative_excluding(pipes, j, dh), fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

}  // namespace
}  // namespace leakscope
