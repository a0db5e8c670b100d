#include <gtest/gtest.h>

#include <cmath>

#include "warmreach/analysis.hpp"

using namespace warmreach;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::io;
}

}  // namespace

TEST(Compare, HandComputedReport) {
  auto g = make_grid({0}, {1}, {4});
  ScalarField a(g, {-1.0, 0.5, 0.2, 3.0}), b(g, {-1.2, 0.0, 0.3, 2.0});
  auto r = compare(a, b, 0.25);
  EXPECT_DOUBLE_EQ(r.max_abs_diff, 1.0);
  EXPECT_DOUBLE_EQ(r.max_signed_excess, 1.0);
  EXPECT_EQ(r.violation_count, 2u);  // 0.5 and 1.0 exceed 0.25
  EXPECT_FALSE(r.containment);       // b ≤ 0 at node 1 but a > 0
  auto s = compare(b, a, 0.0);
  EXPECT_EQ(s.violation_count, 1u);
  EXPECT_TRUE(s.containment);
}

TEST(Compare, SelfComparisonIsClean) {
  auto g = make_grid({0, 0}, {1, 1}, {5, 5});
  auto f = sample(ImplicitShape::ball({0.5, 0.5}, 0.3), g);
  auto r = compare(f, f, 0.0);
  EXPECT_EQ(r.max_abs_diff, 0.0);
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_TRUE(r.containment);
}

TEST(Compare, GridMismatch) {
  auto a = ScalarField::constant(make_grid({0}, {1}, {4}), 0.0);
  auto b = ScalarField::constant(make_grid({0}, {1}, {5}), 0.0);
  EXPECT_EQ(code_of([&] { compare(a, b, 0.0); }), Errc::grid_mismatch);
}

TEST(Oracle, RunningExampleHandPoints) {
  EXPECT_TRUE(double_integrator_oracle(0.0, 0.0, 1, 2));
  EXPECT_TRUE(double_integrator_oracle(3.0, -2.0, 1, 2));    // needs 2 to stop, gap 1
  EXPECT_FALSE(double_integrator_oracle(3.0, -1.0, 1, 2));   // needs 0.5, gap 1
  EXPECT_FALSE(double_integrator_oracle(3.0, 2.0, 1, 2));
  EXPECT_TRUE(double_integrator_oracle(-4.0, 2.5, 1, 2));    // needs 3.125, gap 2
  EXPECT_FALSE(double_integrator_oracle(-4.0, 1.5, 1, 2));   // needs 1.125, gap 2
  EXPECT_TRUE(double_integrator_oracle(3.0, -1.0, 0.2, 2));  // weak brake: needs 2.5
}

TEST(Oracle, DisturbanceShiftsVelocity) {
  // With |d| ≤ 1 a state at rest 0.4 from the target is pushed in:
  // relative speed −1 needs 0.5 to stop.
  EXPECT_FALSE(double_integrator_oracle(2.4, 0.0, 1, 2));
  EXPECT_TRUE(double_integrator_oracle(2.4, 0.0, 1, 2, 1.0));
  EXPECT_FALSE(double_integrator_oracle(2.6, 0.0, 1, 2, 1.0));
}

TEST(Oracle, MatchesClosedFormCurve) {
  // Outside the target the unsafe boundary is p = hw + v²/(2b) for v < 0.
  for (double v = -3.0; v < -0.01; v += 0.1) {
    const double edge = 2.0 + v * v / 2.0;
    EXPECT_TRUE(double_integrator_oracle(edge - 1e-6, v, 1, 2));
    EXPECT_FALSE(double_integrator_oracle(edge + 1e-6, v, 1, 2));
  }
}

TEST(BandMismatch, CountsOnlyOutsideBand) {
  auto g = make_grid({0, 0}, {1, 1}, {11, 11});
  auto oracle = [](double x, double) { return x <= 0.5; };  // boundary columns 5 and 6
  std::vector<std::uint8_t> truth(g.node_count());
  for (std::size_t n = 0; n < g.node_count(); ++n) truth[n] = g.point(n)[0] <= 0.5 + 1e-12;
  EXPECT_EQ(boundary_band_mismatch(BrtMask(g, truth), oracle, 0), 0u);

  auto flipped = truth;
  flipped[g.linear_index(std::vector<std::size_t>{4, 3})] ^= 1;  // one column inside the boundary
  flipped[g.linear_index(std::vector<std::size_t>{0, 3})] ^= 1;  // far away: distance 5
  BrtMask m(g, flipped);
  EXPECT_EQ(boundary_band_mismatch(m, oracle, 0), 2u);
  EXPECT_EQ(boundary_band_mismatch(m, oracle, 1), 1u);
  EXPECT_EQ(boundary_band_mismatch(m, oracle, 5), 0u);
}

TEST(BandMismatch, RequiresTwoDimensions) {
  auto g = make_grid({0}, {1}, {5});
  BrtMask m(g, std::vector<std::uint8_t>(5, 0));
  EXPECT_EQ(code_of([&] { boundary_band_mismatch(m, [](double, double) { return false; }, 1); }),
            Errc::unsupported_dimension);
}

TEST(Rollout, FixedPolicyFollowsExactSolution) {
  // Constant u = −1 from (4, 0): p(t) = 4 − t²/2 reaches p = 2 at t = 2.
  auto g = make_grid({-5, -5}, {5, 5}, {51, 51});
  auto v = ScalarField::constant(g, 1.0);
  auto target = ImplicitShape::axis_band(0, -2, 2);
  RolloutOptions opt;
  opt.dt = 1e-3;
  opt.horizon = 5;
  auto r = rollout(DoubleIntegrator(), v, target, {4.0, 0.0}, RolloutPolicy<DoubleIntegrator>::fixed({-1.0}), opt);
  EXPECT_TRUE(r.entered_target);
  EXPECT_NEAR(r.steps * opt.dt, 2.0, 0.01);
}

TEST(Rollout, LeavesGridAndGuards) {
  auto g = make_grid({-5, -5}, {5, 5}, {51, 51});
  auto v = ScalarField::constant(g, 1.0);
  auto target = ImplicitShape::axis_band(0, -2, 2);
  RolloutOptions opt;
  auto r = rollout(DoubleIntegrator(), v, target, {4.0, 2.0}, RolloutPolicy<DoubleIntegrator>::fixed({1.0}), opt);
  EXPECT_TRUE(r.left_grid);
  EXPECT_FALSE(r.entered_target);
  opt.dt = 0.1;
  EXPECT_EQ(code_of([&] {
              rollout(DoubleIntegrator(), v, target, {4.0, 0.0}, RolloutPolicy<DoubleIntegrator>::greedy(), opt);
            }),
            Errc::invalid_argument);
  EXPECT_EQ(code_of([&] {
              rollout(DoubleIntegrator(), v, target, {6.0, 0.0}, RolloutPolicy<DoubleIntegrator>::greedy(), {});
            }),
            Errc::outside_grid);
}
