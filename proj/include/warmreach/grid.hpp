#pragma once

// Node-centred rectilinear grids, sampled scalar fields, first-order upwind
// differences and the explicit CFL step bound.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "warmreach/error.hpp"

namespace warmreach {

/// N-dimensional node-centred grid. Both endpoints of every axis are nodes;
/// storage order is row-major with the last axis varying fastest.
class RectGrid {
 public:
  RectGrid() = default;

  std::size_t ndim() const noexcept { return lo_.size(); }
  double lo(std::size_t axis) const { return lo_[axis]; }
  double hi(std::size_t axis) const { return hi_[axis]; }
  std::size_t count(std::size_t axis) const { return counts_[axis]; }
  double spacing(std::size_t axis) const { return spacing_[axis]; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }
  std::size_t node_count() const noexcept { return nodes_; }

  std::span<const double> lo() const noexcept { return lo_; }
  std::span<const double> hi() const noexcept { return hi_; }
  std::span<const std::size_t> counts() const noexcept { return counts_; }
  std::span<const double> spacing() const noexcept { return spacing_; }

  double coordinate(std::size_t axis, std::size_t j) const {
    return lo_[axis] + static_cast<double>(j) * spacing_[axis];
  }

  std::vector<std::size_t> multi_index(std::size_t n) const {
    std::vector<std::size_t> idx(ndim());
    for (std::size_t a = ndim(); a-- > 0;) {
      idx[a] = n % counts_[a];
      n /= counts_[a];
    }
    return idx;
  }

  std::size_t linear_index(std::span<const std::size_t> idx) const {
    std::size_t n = 0;
    for (std::size_t a = 0; a < ndim(); ++a) n += idx[a] * strides_[a];
    return n;
  }

  /// Index along `axis` of node n.
  std::size_t axis_index(std::size_t n, std::size_t axis) const {
    return (n / strides_[axis]) % counts_[axis];
  }

  std::vector<double> point(std::size_t n) const {
    std::vector<double> x(ndim());
    for (std::size_t a = 0; a < ndim(); ++a) x[a] = coordinate(a, axis_index(n, a));
    return x;
  }

  bool contains(std::span<const double> x, double slack = 0.0) const {
    if (x.size() != ndim()) return false;
    for (std::size_t a = 0; a < ndim(); ++a)
      if (!(x[a] >= lo_[a] - slack && x[a] <= hi_[a] + slack)) return false;
    return true;
  }

  friend bool operator==(const RectGrid& a, const RectGrid& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.counts_ == b.counts_;
  }

  friend RectGrid make_grid(std::span<const double> lo, std::span<const double> hi,
                            std::span<const std::size_t> counts);

 private:
  std::vector<double> lo_, hi_, spacing_;
  std::vector<std::size_t> counts_, strides_;
  std::size_t nodes_ = 0;
};

inline RectGrid make_grid(std::span<const double> lo, std::span<const double> hi,
                          std::span<const std::size_t> counts) {
  if (lo.size() != hi.size() || lo.size() != counts.size() || lo.empty())
    throw Error(Errc::dimension_mismatch, "lo/hi/counts must have equal non-zero length");
  RectGrid g;
  const std::size_t nd = lo.size();
  std::size_t total = 1;
  for (std::size_t a = 0; a < nd; ++a) {
    if (counts[a] < 3)
      throw Error(Errc::count_too_small, "axis " + std::to_string(a) + " has fewer than 3 nodes");
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(hi[a] > lo[a]))
      throw Error(Errc::inverted_bounds, "axis " + std::to_string(a) + " requires hi > lo");
    // 8 bytes per node must stay addressable.
    if (total > std::numeric_limits<std::size_t>::max() / 8 / counts[a])
      throw Error(Errc::size_overflow, "grid node count overflows the address range");
    total *= counts[a];
  }
  g.lo_.assign(lo.begin(), lo.end());
  g.hi_.assign(hi.begin(), hi.end());
  g.counts_.assign(counts.begin(), counts.end());
  g.spacing_.resize(nd);
  g.strides_.resize(nd);
  for (std::size_t a = 0; a < nd; ++a)
    g.spacing_[a] = (hi[a] - lo[a]) / static_cast<double>(counts[a] - 1);
  std::size_t s = 1;
  for (std::size_t a = nd; a-- > 0;) {
    g.strides_[a] = s;
    s *= counts[a];
  }
  g.nodes_ = total;
  return g;
}

inline RectGrid make_grid(std::initializer_list<double> lo, std::initializer_list<double> hi,
                          std::initializer_list<std::size_t> counts) {
  return make_grid(std::span<const double>(lo.begin(), lo.size()),
                   std::span<const double>(hi.begin(), hi.size()),
                   std::span<const std::size_t>(counts.begin(), counts.size()));
}

/// One value per grid node. Values are checked finite on construction; the
/// field is treated as immutable by every operation in the library.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(RectGrid grid, std::vector<double> values, std::string label = {})
      : grid_(std::move(grid)), values_(std::move(values)), label_(std::move(label)) {
    if (values_.size() != grid_.node_count())
      throw Error(Errc::dimension_mismatch, "value count does not match grid node count");
    for (double v : values_)
      if (!std::isfinite(v)) throw Error(Errc::non_finite, "field '" + label_ + "' has a non-finite value");
  }

  static ScalarField constant(const RectGrid& grid, double value, std::string label = {}) {
    return ScalarField(grid, std::vector<double>(grid.node_count(), value), std::move(label));
  }

  const RectGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t n) const { return values_[n]; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::string& label() const noexcept { return label_; }

  ScalarField relabeled(std::string label) const& {
    ScalarField f = *this;
    f.label_ = std::move(label);
    return f;
  }

 private:
  RectGrid grid_;
  std::vector<double> values_;
  std::string label_;
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid()))
    throw Error(Errc::grid_mismatch, "fields '" + a.label() + "' and '" + b.label() + "' live on different grids");
}

/// Left and right one-sided differences of node n along `axis`. Edge nodes use a
/// linearly extrapolated ghost value, so both differences coincide there.
inline std::pair<double, double> one_sided_differences(std::span<const double> v, const RectGrid& grid,
                                                       std::size_t n, std::size_t axis) {
  const std::size_t j = grid.axis_index(n, axis);
  const std::size_t s = grid.stride(axis);
  const double h = grid.spacing(axis);
  const std::size_t last = grid.count(axis) - 1;
  if (j == 0) {
    double d = (v[n + s] - v[n]) / h;
    return {d, d};
  }
  if (j == last) {
    double d = (v[n] - v[n - s]) / h;
    return {d, d};
  }
  return {(v[n] - v[n - s]) / h, (v[n + s] - v[n]) / h};
}

struct AxisGradient {
  ScalarField minus;  // D⁻
  ScalarField plus;   // D⁺
};

inline std::vector<AxisGradient> upwind_gradients(const ScalarField& field) {
  const RectGrid& g = field.grid();
  std::vector<AxisGradient> out;
  out.reserve(g.ndim());
  for (std::size_t a = 0; a < g.ndim(); ++a) {
    std::vector<double> lv(g.node_count()), rv(g.node_count());
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      auto [l, r] = one_sided_differences(field.values(), g, n, a);
      lv[n] = l;
      rv[n] = r;
    }
    out.push_back({ScalarField(g, std::move(lv), "D-" + std::to_string(a)),
                   ScalarField(g, std::move(rv), "D+" + std::to_string(a))});
  }
  return out;
}

/// Largest stable explicit step: cfl / Σ alpha_i / h_i.
inline double cfl_timestep(std::span<const double> alphas, const RectGrid& grid, double cfl) {
  if (alphas.size() != grid.ndim())
    throw Error(Errc::dimension_mismatch, "one dissipation bound per axis is required");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw Error(Errc::invalid_argument, "cfl must lie in (0, 1]");
  double rate = 0.0;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    if (!(alphas[a] >= 0.0) || !std::isfinite(alphas[a]))
      throw Error(Errc::invalid_argument, "dissipation bounds must be finite and non-negative");
    rate += alphas[a] / grid.spacing(a);
  }
  if (rate == 0.0) throw Error(Errc::degenerate_dynamics, "all dissipation bounds are zero");
  return cfl / rate;
}

}  // namespace warmreach
