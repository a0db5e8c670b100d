#pragma once

// Implicit-surface shapes used as target functions l(x) and warm-start seeds
// k(x). Primitives evaluate to signed distances; combinations use min/max
// (union/intersection) and negation (complement). The combined functions keep
// the correct sub-zero set and stay Lipschitz, but are no longer exact signed
// distances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "warmreach/error.hpp"
#include "warmreach/grid.hpp"

namespace warmreach {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

class ImplicitShape {
 public:
  enum class Kind { axis_band, box, ball, complement, unite, intersect, constant };

  /// {x : lo <= x[axis] <= hi}; every other axis is unconstrained.
  static ImplicitShape axis_band(std::size_t axis, double lo, double hi) {
    if (!(hi >= lo)) throw Error(Errc::empty_range, "axis band requires hi >= lo");
    ImplicitShape s(Kind::axis_band);
    s.axes_ = {axis};
    s.lo_ = {lo};
    s.hi_ = {hi};
    return s;
  }

  /// Box over the listed axes; std::nullopt marks an unconstrained axis.
  static ImplicitShape box(std::span<const std::optional<Interval>> sides) {
    ImplicitShape s(Kind::box);
    for (std::size_t a = 0; a < sides.size(); ++a) {
      if (!sides[a]) continue;
      if (!(sides[a]->hi >= sides[a]->lo)) throw Error(Errc::empty_range, "box side requires hi >= lo");
      s.axes_.push_back(a);
      s.lo_.push_back(sides[a]->lo);
      s.hi_.push_back(sides[a]->hi);
    }
    if (s.axes_.empty()) throw Error(Errc::invalid_argument, "box constrains no axis");
    return s;
  }

  /// Euclidean ball in the leading center.size() axes.
  static ImplicitShape ball(std::vector<double> center, double radius) {
    if (center.empty()) throw Error(Errc::invalid_argument, "ball needs a center");
    if (!(radius > 0.0)) throw Error(Errc::invalid_argument, "ball radius must be positive");
    ImplicitShape s(Kind::ball);
    for (std::size_t a = 0; a < center.size(); ++a) s.axes_.push_back(a);
    s.lo_ = std::move(center);
    s.value_ = radius;
    return s;
  }

  static ImplicitShape constant(double value) {
    if (!std::isfinite(value)) throw Error(Errc::non_finite, "constant shape value must be finite");
    ImplicitShape s(Kind::constant);
    s.value_ = value;
    return s;
  }

  static ImplicitShape complement(ImplicitShape child) {
    ImplicitShape s(Kind::complement);
    s.children_.push_back(std::move(child));
    return s;
  }

  static ImplicitShape unite(std::vector<ImplicitShape> children) {
    if (children.empty()) throw Error(Errc::arity, "union needs at least one shape");
    ImplicitShape s(Kind::unite);
    s.children_ = std::move(children);
    return s;
  }

  static ImplicitShape intersect(std::vector<ImplicitShape> children) {
    if (children.empty()) throw Error(Errc::arity, "intersection needs at least one shape");
    ImplicitShape s(Kind::intersect);
    s.children_ = std::move(children);
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  std::span<const ImplicitShape> children() const noexcept { return children_; }
  std::span<const std::size_t> axes() const noexcept { return axes_; }
  /// Ball center (ball) or per-axis lower bounds (band, box).
  std::span<const double> lower() const noexcept { return lo_; }
  std::span<const double> upper() const noexcept { return hi_; }
  /// Ball radius or constant value.
  double scalar() const noexcept { return value_; }

  /// Largest axis index referenced anywhere in the shape, or -1 if none.
  long max_axis() const {
    long m = -1;
    for (auto a : axes_) m = std::max(m, static_cast<long>(a));
    for (const auto& c : children_) m = std::max(m, c.max_axis());
    return m;
  }

  double evaluate(std::span<const double> x) const {
    switch (kind_) {
      case Kind::constant:
        return value_;
      case Kind::axis_band: {
        const double p = x[axes_[0]];
        return std::max(lo_[0] - p, p - hi_[0]);
      }
      case Kind::box: {
        double outside2 = 0.0;
        double inside = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < axes_.size(); ++k) {
          const double p = x[axes_[k]];
          const double d = std::max(lo_[k] - p, p - hi_[k]);
          if (d > 0.0) outside2 += d * d;
          inside = std::max(inside, d);
        }
        return outside2 > 0.0 ? std::sqrt(outside2) : inside;
      }
      case Kind::ball: {
        double r2 = 0.0;
        for (std::size_t k = 0; k < axes_.size(); ++k) {
          const double d = x[axes_[k]] - lo_[k];
          r2 += d * d;
        }
        return std::sqrt(r2) - value_;
      }
      case Kind::complement:
        return -children_[0].evaluate(x);
      case Kind::unite: {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& c : children_) v = std::min(v, c.evaluate(x));
        return v;
      }
      case Kind::intersect: {
        double v = -std::numeric_limits<double>::infinity();
        for (const auto& c : children_) v = std::max(v, c.evaluate(x));
        return v;
      }
    }
    return 0.0;
  }

  double evaluate(std::initializer_list<double> x) const {
    return evaluate(std::span<const double>(x.begin(), x.size()));
  }

  friend bool operator==(const ImplicitShape&, const ImplicitShape&) = default;

 private:
  explicit ImplicitShape(Kind k) : kind_(k) {}

  Kind kind_ = Kind::constant;
  std::vector<std::size_t> axes_;
  std::vector<double> lo_, hi_;
  double value_ = 0.0;
  std::vector<ImplicitShape> children_;
};

enum class CombineOp { unite, intersect, complement };

inline ImplicitShape combine(CombineOp op, std::vector<ImplicitShape> shapes) {
  switch (op) {
    case CombineOp::unite:
      return ImplicitShape::unite(std::move(shapes));
    case CombineOp::intersect:
      return ImplicitShape::intersect(std::move(shapes));
    case CombineOp::complement:
      if (shapes.size() != 1) throw Error(Errc::arity, "complement takes exactly one shape");
      return ImplicitShape::complement(std::move(shapes[0]));
  }
  throw Error(Errc::invalid_argument, "unknown combine op");
}

inline ScalarField sample(const ImplicitShape& shape, const RectGrid& grid, std::string label = "l") {
  if (shape.max_axis() >= static_cast<long>(grid.ndim()))
    throw Error(Errc::axis_out_of_range, "shape references axis " + std::to_string(shape.max_axis()) +
                                             " on a " + std::to_string(grid.ndim()) + "-D grid");
  std::vector<double> values(grid.node_count());
  std::vector<double> x(grid.ndim());
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    for (std::size_t a = 0; a < grid.ndim(); ++a) x[a] = grid.coordinate(a, grid.axis_index(n, a));
    values[n] = shape.evaluate(x);
  }
  return ScalarField(grid, std::move(values), std::move(label));
}

/// Uniform double in [0, 1) from the Park-Miller minimal-standard LCG.
/// std::minstd_rand is bit-specified, and the mapping below avoids
/// implementation-defined distribution classes so sequences are portable.
inline double lcg_unit(std::minstd_rand& rng) {
  return static_cast<double>(rng() - std::minstd_rand::min()) /
         static_cast<double>(std::minstd_rand::max() - std::minstd_rand::min() + 1);
}

/// Complement of the union of `count` balls with centers uniform over the grid
/// box and radii uniform over radius_range: positive inside the circles,
/// negative outside.
inline ImplicitShape random_circles(std::uint32_t seed, std::size_t count, Interval radius_range,
                                    const RectGrid& grid) {
  if (count == 0) throw Error(Errc::invalid_argument, "random_circles needs count >= 1");
  if (!(radius_range.hi >= radius_range.lo) || !(radius_range.lo > 0.0))
    throw Error(Errc::empty_range, "radius range must be a non-empty positive interval");
  std::minstd_rand rng(seed == 0 ? 1u : seed);
  std::vector<ImplicitShape> balls;
  balls.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<double> center(grid.ndim());
    for (std::size_t a = 0; a < grid.ndim(); ++a)
      center[a] = grid.lo(a) + lcg_unit(rng) * (grid.hi(a) - grid.lo(a));
    double r = radius_range.lo + lcg_unit(rng) * (radius_range.hi - radius_range.lo);
    balls.push_back(ImplicitShape::ball(std::move(center), r));
  }
  return ImplicitShape::complement(ImplicitShape::unite(std::move(balls)));
}

}  // namespace warmreach
