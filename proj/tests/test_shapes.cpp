#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "warmreach/shapes.hpp"

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

TEST(Shapes, RunningExampleBand) {
  auto band = ImplicitShape::axis_band(0, -2, 2);
  EXPECT_DOUBLE_EQ(band.evaluate({0, 3}), -2.0);
  EXPECT_DOUBLE_EQ(band.evaluate({3, 0}), 1.0);
  EXPECT_DOUBLE_EQ(band.evaluate({2, -40}), 0.0);
  EXPECT_DOUBLE_EQ(band.evaluate({-2, 7}), 0.0);
}

TEST(Shapes, SampleMatchesEvaluation) {
  auto g = make_grid({-5, -5}, {5, 5}, {11, 11});
  auto f = sample(ImplicitShape::axis_band(0, -2, 2), g);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const auto x = g.point(n);
    EXPECT_DOUBLE_EQ(f[n], std::max(-2.0 - x[0], x[0] - 2.0));
  }
}

TEST(Shapes, BallAndConstant) {
  auto ball = ImplicitShape::ball({0, 0}, 1.0);
  EXPECT_DOUBLE_EQ(ball.evaluate({0, 0}), -1.0);
  EXPECT_DOUBLE_EQ(ball.evaluate({3, 4}), 4.0);
  auto g = make_grid({-1, -1}, {1, 1}, {5, 5});
  auto z = sample(ImplicitShape::constant(0.0), g);
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
}

TEST(Shapes, BoxSignedDistance) {
  std::vector<std::optional<Interval>> sides{Interval{-1, 1}, std::nullopt, Interval{0, 2}};
  auto box = ImplicitShape::box(sides);
  EXPECT_DOUBLE_EQ(box.evaluate({0, 100, 1}), -1.0);
  EXPECT_DOUBLE_EQ(box.evaluate({4, 0, 6}), 5.0);  // corner distance √(3² + 4²)
  EXPECT_DOUBLE_EQ(box.evaluate({1, 0, 1}), 0.0);
}

TEST(Shapes, CombineExamples) {
  auto u = combine(CombineOp::unite, {ImplicitShape::ball({2, 0}, 1), ImplicitShape::ball({-2, 0}, 1)});
  EXPECT_DOUBLE_EQ(u.evaluate({0, 0}), 1.0);
  auto c = combine(CombineOp::complement, {ImplicitShape::ball({0, 0}, 1)});
  EXPECT_DOUBLE_EQ(c.evaluate({0, 0}), 1.0);
  auto i = combine(CombineOp::intersect, {ImplicitShape::axis_band(0, -2, 2), ImplicitShape::axis_band(1, -1, 1)});
  EXPECT_DOUBLE_EQ(i.evaluate({0, 0}), -1.0);
}

TEST(Shapes, ArityAndAxisErrors) {
  EXPECT_EQ(code_of([] { combine(CombineOp::unite, {}); }), Errc::arity);
  EXPECT_EQ(code_of([] { combine(CombineOp::intersect, {}); }), Errc::arity);
  EXPECT_EQ(code_of([] {
              combine(CombineOp::complement, {ImplicitShape::constant(1), ImplicitShape::constant(2)});
            }),
            Errc::arity);
  auto g = make_grid({0, 0}, {1, 1}, {3, 3});
  EXPECT_EQ(code_of([&] { sample(ImplicitShape::axis_band(2, 0, 1), g); }), Errc::axis_out_of_range);
  EXPECT_EQ(code_of([&] { sample(ImplicitShape::ball({0, 0, 0}, 1), g); }), Errc::axis_out_of_range);
}

TEST(Shapes, UnionIntersectionAreExactMinMax) {
  auto g = make_grid({-3, -3}, {3, 3}, {31, 31});
  auto a = ImplicitShape::ball({1, 0}, 1.5), b = ImplicitShape::axis_band(1, -0.5, 2);
  auto fa = sample(a, g), fb = sample(b, g);
  auto fu = sample(ImplicitShape::unite({a, b}), g), fi = sample(ImplicitShape::intersect({a, b}), g);
  auto fcc = sample(ImplicitShape::complement(ImplicitShape::complement(a)), g);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    EXPECT_EQ(fu[n], std::min(fa[n], fb[n]));
    EXPECT_EQ(fi[n], std::max(fa[n], fb[n]));
    EXPECT_EQ(fcc[n], fa[n]);
  }
}

TEST(Shapes, SignMatchesGeometricMembership) {
  // Membership computed from the geometric definitions, independent of evaluate().
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-4, 4);
  auto band = ImplicitShape::axis_band(0, -2, 2);
  auto ball = ImplicitShape::ball({1, -1}, 1.5);
  std::vector<std::optional<Interval>> sides{Interval{-1, 2}, Interval{0, 3}};
  auto box = ImplicitShape::box(sides);
  auto combo = ImplicitShape::intersect({ImplicitShape::unite({ball, box}), ImplicitShape::complement(band)});
  for (int k = 0; k < 10000; ++k) {
    const double p = u(rng), v = u(rng);
    const bool in_band = std::abs(p) <= 2;
    const bool in_ball = std::hypot(p - 1, v + 1) <= 1.5;
    const bool in_box = p >= -1 && p <= 2 && v >= 0 && v <= 3;
    EXPECT_EQ(band.evaluate({p, v}) <= 0, in_band);
    EXPECT_EQ(ball.evaluate({p, v}) <= 0, in_ball);
    EXPECT_EQ(box.evaluate({p, v}) <= 0, in_box);
    // Complement of a closed band is the open exterior; exclude the measure-zero boundary.
    if (std::abs(std::abs(p) - 2) > 1e-12) EXPECT_EQ(combo.evaluate({p, v}) <= 0, (in_ball || in_box) && !in_band);
  }
}

TEST(RandomCircles, DeterministicPerSeed) {
  auto g = make_grid({-5, -5}, {5, 5}, {11, 11});
  auto a = random_circles(1, 5, {0.5, 2}, g), b = random_circles(1, 5, {0.5, 2}, g);
  EXPECT_EQ(a, b);
  auto c = random_circles(2, 5, {0.5, 2}, g);
  EXPECT_NE(a, c);
}

TEST(RandomCircles, ParametersWithinRanges) {
  auto g = make_grid({-5, 0}, {5, 2}, {11, 11});
  auto s = random_circles(3, 12, {0.5, 2}, g);
  ASSERT_EQ(s.kind(), ImplicitShape::Kind::complement);
  const auto& u = s.children()[0];
  ASSERT_EQ(u.children().size(), 12u);
  for (const auto& ball : u.children()) {
    EXPECT_GE(ball.lower()[0], -5);
    EXPECT_LT(ball.lower()[0], 5);
    EXPECT_GE(ball.lower()[1], 0);
    EXPECT_LT(ball.lower()[1], 2);
    EXPECT_GE(ball.scalar(), 0.5);
    EXPECT_LT(ball.scalar(), 2);
  }
}

TEST(RandomCircles, PositiveAtEveryCenter) {
  auto g = make_grid({-5, -5}, {5, 5}, {11, 11});
  auto s = random_circles(11, 6, {0.5, 2}, g);
  const auto& u = s.children()[0];
  for (const auto& ball : u.children()) {
    const std::vector<double> c(ball.lower().begin(), ball.lower().end());
    // Inside the union the value is at most −radius of this circle; the complement flips it.
    EXPECT_LE(u.evaluate(c), -ball.scalar());
    EXPECT_GE(s.evaluate(c), ball.scalar());
  }
}

TEST(RandomCircles, Errors) {
  auto g = make_grid({-5, -5}, {5, 5}, {11, 11});
  EXPECT_EQ(code_of([&] { random_circles(1, 0, {0.5, 2}, g); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([&] { random_circles(1, 3, {2, 0.5}, g); }), Errc::empty_range);
  EXPECT_EQ(code_of([&] { random_circles(1, 3, {0, 1}, g); }), Errc::empty_range);
}

TEST(Lcg, FrozenSequence) {
  // Revised minimal standard: x1 = 48271 for seed 1, x2 = 48271² mod (2³¹ − 1).
  std::minstd_rand rng(1);
  EXPECT_DOUBLE_EQ(lcg_unit(rng), (48271.0 - 1) / 2147483646.0);
  EXPECT_DOUBLE_EQ(lcg_unit(rng), (182605794.0 - 1) / 2147483646.0);
}
