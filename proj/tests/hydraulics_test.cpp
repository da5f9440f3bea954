#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "leakscope/hydraulics.hpp"
#include "oracles.hpp"

namespace leakscope {
namespace {

PipeSet example2_pipes() { return PipeSet({QuadraticPlusLinear{2}, QuadraticPlusLinear{4}, QuadraticPlusLinear{6}}); }
LeakSpec example2_leak() { return {0, 0.65, sqrt_leak()}; }

void expect_state_invariants(HydraulicState const& s, PipeSet const& pipes, LeakSpec const& leak) {
  double const x = leak.position;
  HeadLossFn const& u = pipes[leak.pipe];
  for (std::size_t i = 0; i < pipes.size(); ++i) {
    if (i == leak.pipe) continue;
    EXPECT_LE(std::abs(s.dh - evaluate(pipes[i], s.pipe_flows[i])), 1e-10);
  }
  EXPECT_LE(std::abs(s.h_in - s.h_leak - x * evaluate(u, s.q_in_leaking)), 1e-10);
  EXPECT_LE(std::abs(s.h_leak - s.h_out - (1 - x) * evaluate(u, s.q_out_leaking)), 1e-10);
  EXPECT_EQ(s.q_in_leaking - s.q_out_leaking, s.q_leak);
  EXPECT_LE(std::abs(s.q_leak - leak_flow(leak.law, s.h_leak)), 1e-10);
}

TEST(SolveLeakyState, Example2MatchesIndependentBisection) {
  auto const pipes = example2_pipes();
  auto const leak = example2_leak();
  auto const s = solve_leaky_state(pipes, leak, 5.0, 1.0);
  EXPECT_DOUBLE_EQ(s.dh, 4.0);
  expect_state_invariants(s, pipes, leak);

  // Mass balance at the leak with the textbook quadratic inverse.
  auto const q = [](double h) { return std::copysign(oracle::quadratic_plus_linear_flow(2.0, std::abs(h)), h); };
  double const h_leak = oracle::bisect([&](double h) { return q((5.0 - h) / 0.65) - q((h - 1.0) / 0.35) - std::sqrt(h); }, 1.0, 5.0);
  EXPECT_NEAR(s.h_leak, h_leak, 1e-12);
  auto const d = measure(s, pipes, leak);
  double const others = oracle::quadratic_plus_linear_flow(4, 4) + oracle::quadratic_plus_linear_flow(6, 4);
  EXPECT_NEAR(d.q_in, q((5.0 - h_leak) / 0.65) + others, 1e-11);
  EXPECT_NEAR(d.q_out, q((h_leak - 1.0) / 0.35) + others, 1e-11);
}

TEST(SolveLeakyState, ZeroFixedDemandIsTheNoLeakState) {
  auto const pipes = example2_pipes();
  LeakSpec const leak{1, 0.4, FixedDemand{0.0}};
  auto const s = solve_leaky_state(pipes, leak, 3.0, 1.0);
  double const q = invert(pipes[1], 2.0);
  EXPECT_NEAR(s.q_in_leaking, q, 1e-12);
  EXPECT_NEAR(s.q_out_leaking, q, 1e-12);
  EXPECT_NEAR(s.h_leak, 3.0 - 0.4 * 2.0, 1e-12);
  auto const d = measure(s, pipes, leak);
  EXPECT_NEAR(d.q_in, d.q_out, 1e-12);
}

TEST(SolveLeakyState, LinearFixedDemandMatchesClosedForm) {
  PipeSet const pipes({Linear{0.1}, Linear{0.2}, Linear{0.3}});
  LeakSpec const leak{1, 0.3, FixedDemand{5.0}};
  auto const s = solve_leaky_state(pipes, leak, 2.0, 1.0);
  auto const ref = oracle::linear_fixed_demand(0.2, 0.3, 5.0, 2.0, 1.0);
  EXPECT_NEAR(s.q_in_leaking, ref.q_in_k, 1e-10);
  EXPECT_NEAR(s.q_out_leaking, ref.q_out_k, 1e-10);
  EXPECT_NEAR(s.h_leak, ref.h_leak, 1e-10);
  EXPECT_NEAR(s.q_leak, 5.0, 1e-10);
  expect_state_invariants(s, pipes, leak);
}

TEST(SolveLeakyState, LinearSqrtLeakMatchesClosedForm) {
  PipeSet const pipes({Linear{0.1}, Linear{0.2}, Linear{0.3}});
  LeakSpec const leak{1, 0.3, PowerLawLeak{50.0, 0.5, 0.0}};
  for (double h_in : {1.5, 3.0, 10.0}) {
    auto const s = solve_leaky_state(pipes, leak, h_in, 1.0);
    auto const ref = oracle::linear_sqrt_leak(0.2, 0.3, 50.0, h_in, 1.0);
    EXPECT_NEAR(s.h_leak, ref.h_leak, 1e-10);
    EXPECT_NEAR(s.q_leak, ref.q_leak, 1e-10);
    EXPECT_NEAR(s.q_in_leaking, ref.q_in_k, 1e-10);
  }
}

TEST(SolveLeakyState, ZeroHeadLossHasBackflowDownstream) {
  PipeSet const pipes({SignedQuadratic{0.05}, SignedQuadratic{0.1}});
  LeakSpec const leak{0, 0.4, FixedDemand{2.0}};
  auto const s = solve_leaky_state(pipes, leak, 1.0, 1.0);
  expect_state_invariants(s, pipes, leak);
  EXPECT_LT(s.h_leak, 1.0);
  EXPECT_GT(s.q_in_leaking, 0.0);
  EXPECT_LT(s.q_out_leaking, 0.0);
  auto const d = measure(s, pipes, leak);
  EXPECT_EQ(s.pipe_flows[1], 0.0);
  EXPECT_EQ(d.q_in, s.q_in_leaking);
}

TEST(SolveLeakyState, ReversedHeadLoss) {
  auto const pipes = example2_pipes();
  auto const leak = example2_leak();
  auto const s = solve_leaky_state(pipes, leak, 1.0, 3.0);
  expect_state_invariants(s, pipes, leak);
  EXPECT_LT(s.q_in_leaking, 0.0);
}

TEST(SolveLeakyState, Errors) {
  auto const pipes = example2_pipes();
  EXPECT_THROW(solve_leaky_state(pipes, {0, 0.65, PowerLawLeak{1.0, 0.5, 100.0}}, 5.0, 1.0), NoRootError);
  EXPECT_THROW(solve_leaky_state(pipes, {3, 0.5, sqrt_leak()}, 5.0, 1.0), IndexError);
  EXPECT_THROW(solve_leaky_state(pipes, {0, 1.0, sqrt_leak()}, 5.0, 1.0), InvalidArgument);
  EXPECT_THROW(solve_leaky_state(pipes, {0, 0.5, FixedDemand{-1.0}}, 5.0, 1.0), InvalidArgument);
}

TEST(SolveLeakyState, IndependentOfInitialBracket) {
  auto const pipes = PipeSet({SignedQuadratic{0.05}, PowerLaw{0.3, 1.852}, QuadraticPlusLinear{1.0}});
  LeakSpec const leak{1, 0.37, PowerLawLeak{0.8, 0.6, 0.2}};
  auto const a = solve_leaky_state(pipes, leak, 4.0, 1.5);
  for (auto const& bracket : {roots::Bracket{-50.0, -40.0}, roots::Bracket{3.9, 3.95}, roots::Bracket{10.0, 1000.0}}) {
    auto const b = solve_leaky_state(pipes, leak, 4.0, 1.5, bracket);
    EXPECT_NEAR(a.h_leak, b.h_leak, 1e-10);
    EXPECT_NEAR(a.q_leak, b.q_leak, 1e-10);
  }
}

TEST(SolveLeakyState, LeakGrowsWithInletHead) {
  auto const pipes = example2_pipes();
  auto const leak = example2_leak();
  double prev = -1.0;
  for (double h_in = 1.0; h_in <= 10.0; h_in += 0.25) {
    double const q = solve_leaky_state(pipes, leak, h_in, 1.0).q_leak;
    EXPECT_GE(q, prev);
    prev = q;
  }
}

TEST(SolveLeakyState, ConservationOnRandomStates) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    PipeSet const pipes({SignedQuadratic{0.02 + unit(rng)}, QuadraticPlusLinear{0.5 + unit(rng)},
                         PowerLaw{0.1 + unit(rng), 1.2 + unit(rng)}});
    LeakSpec const leak{static_cast<std::size_t>(trial % 3), 0.05 + 0.9 * unit(rng),
                        PowerLawLeak{0.1 + unit(rng), 0.3 + unit(rng), 0.0}};
    double const h_out = 1.0 + 3.0 * unit(rng);
    double const h_in = h_out + 6.0 * unit(rng) - 1.0;
    auto const s = solve_leaky_state(pipes, leak, h_in, h_out);
    auto const d = measure(s, pipes, leak);
    EXPECT_LE(std::abs((d.q_in - d.q_out) - s.q_leak), 1e-12 * std::max(1.0, std::abs(d.q_in)));
    expect_state_invariants(s, pipes, leak);
  }
}

TEST(Sweep, PreservesOrderAndRecordsFailures) {
  auto const pipes = example2_pipes();
  LeakSpec const leak{0, 0.65, PowerLawLeak{1.0, 0.5, 2.0}};
  // The middle pair has heads too low for the elevated leak.
  std::vector<std::pair<double, double>> const boundary{{5.0, 4.0}, {1.0, 0.5}, {5.0, 4.0}};
  auto const entries = sweep(pipes, leak, boundary);
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_TRUE(entries[0].ok());
  EXPECT_FALSE(entries[1].ok());
  EXPECT_FALSE(entries[1].error.empty());
  EXPECT_EQ(*entries[0].point, *entries[2].point);
  EXPECT_EQ(data_points(entries).size(), 2u);

  EXPECT_THROW(sweep(pipes, leak, {{1.0, 0.5}, {0.5, 0.2}}), NoRootError);
  EXPECT_TRUE(sweep(pipes, leak, {}).empty());
}

TEST(Sweep, Example1HundredStates) {
  PipeSet const pipes({SignedQuadratic{0.05}, SignedQuadratic{0.1}, SignedQuadratic{0.2}});
  LeakSpec const leak{1, 0.3, sqrt_leak()};
  std::vector<std::pair<double, double>> boundary;
  for (int i = 0; i < 100; ++i) boundary.emplace_back(1.5 + 4.5 * i / 99.0, 1.0);
  auto const data = data_points(sweep(pipes, leak, boundary));
  ASSERT_EQ(data.size(), 100u);
  for (auto const& d : data) EXPECT_GT(d.q_in - d.q_out, 0.0);
}

TEST(Measure, NoLeakGivesEqualFlows) {
  auto const pipes = example2_pipes();
  LeakSpec const leak{2, 0.5, FixedDemand{0.0}};
  auto const d = measure(solve_leaky_state(pipes, leak, 4.0, 1.0), pipes, leak);
  EXPECT_NEAR(d.q_in, d.q_out, 1e-12);
}

TEST(HeadProfile, BoundaryAndLeakValues) {
  auto const pipes = example2_pipes();
  auto const leak = example2_leak();
  auto const s = solve_leaky_state(pipes, leak, 5.0, 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(head_profile(s, pipes, leak, i, 0.0), 5.0);
    EXPECT_NEAR(head_profile(s, pipes, leak, i, 1.0), 1.0, 1e-14);
  }
  EXPECT_DOUBLE_EQ(head_profile(s, pipes, leak, 0, 0.65), s.h_leak);
  EXPECT_DOUBLE_EQ(head_profile(s, pipes, leak, 2, 0.5), 3.0);
  EXPECT_THROW(head_profile(s, pipes, leak, 0, 1.5), InvalidArgument);
  EXPECT_THROW(head_profile(s, pipes, leak, 5, 0.5), IndexError);
}

}  // namespace
}  // namespace leakscope
