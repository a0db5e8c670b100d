#pragma once

// Verification instruments: pointwise field comparison, the analytic
// double-integrator BRT, forward rollouts and the banded oracle mismatch count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

#include "warmreach/dynamics.hpp"
#include "warmreach/error.hpp"
#include "warmreach/grid.hpp"
#include "warmreach/hamiltonian.hpp"
#include "warmreach/shapes.hpp"
#include "warmreach/solver.hpp"

namespace warmreach {

struct ComparisonReport {
  double max_abs_diff = 0.0;
  double max_signed_excess = 0.0;  // max over nodes of A − B
  std::size_t violation_count = 0;  // nodes with A > B + tolerance
  bool containment = true;          // sub-zero set of A contains that of B
  double tolerance = 0.0;
};

inline ComparisonReport compare(const ScalarField& a, const ScalarField& b, double tolerance) {
  require_same_grid(a, b);
  ComparisonReport r;
  r.tolerance = tolerance;
  r.max_signed_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = a[n] - b[n];
    r.max_abs_diff = std::max(r.max_abs_diff, std::abs(d));
    r.max_signed_excess = std::max(r.max_signed_excess, d);
    if (d > tolerance) ++r.violation_count;
    if (b[n] <= 0.0 && !(a[n] <= 0.0)) r.containment = false;
  }
  return r;
}

/// Analytic BRT of  ṗ = v + d,  v̇ = b·u,  |u| ≤ 1,  |d| ≤ d_bound  for the
/// target |p| ≤ half_width. Outside the target the best the controller can do
/// is accelerate away while the disturbance pushes inward, so the relative
/// closing speed is v ∓ d_bound and the state is unsafe iff that speed points
/// at the target and its braking distance exceeds the gap. d_bound = 0 gives
/// the running-example form.
inline bool double_integrator_oracle(double p, double v, double b, double half_width, double d_bound = 0.0) {
  if (!(b > 0.0)) throw Error(Errc::invalid_argument, "oracle needs b > 0");
  if (!(d_bound >= 0.0)) throw Error(Errc::invalid_argument, "oracle needs d_bound >= 0");
  if (std::abs(p) <= half_width) return true;
  if (p > half_width) {
    const double w = v - d_bound;
    return w < 0.0 && p - half_width < w * w / (2.0 * b);
  }
  const double w = v + d_bound;
  return w > 0.0 && -half_width - p < w * w / (2.0 * b);
}

template <ControlAffineSystem M>
struct RolloutPolicy {
  enum class Kind { greedy, fixed };
  Kind kind = Kind::greedy;
  typename M::Control u{};  // used by Kind::fixed

  static RolloutPolicy greedy() { return {}; }
  static RolloutPolicy fixed(typename M::Control input) { return {Kind::fixed, input}; }
};

struct RolloutOptions {
  double dt = 0.001;
  double horizon = 10.0;
  bool adversarial = false;  // disturbance minimising ⟨∇V, ẋ⟩; otherwise d = 0 clipped to the box
  std::size_t record_every = 1;
};

template <ControlAffineSystem M>
struct RolloutResult {
  std::vector<typename M::State> trajectory;
  bool entered_target = false;
  bool left_grid = false;
  double min_target_value = std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
};

/// Forward-Euler simulation from x0. The value field V supplies the grid box,
/// the greedy control and the adversarial disturbance; `target` is evaluated
/// exactly along the path, so entered_target means min l(x(t)) ≤ 0 on the
/// sampled times.
template <ControlAffineSystem M>
RolloutResult<M> rollout(const M& model, const ScalarField& value, const ImplicitShape& target,
                         typename M::State x0, const RolloutPolicy<M>& policy, const RolloutOptions& opt = {}) {
  const RectGrid& g = value.grid();
  if (g.ndim() != M::kStateDim) throw Error(Errc::dimension_mismatch, "grid and model dimensions differ");
  if (!(opt.dt > 0.0) || !(opt.horizon >= 0.0)) throw Error(Errc::invalid_argument, "dt and horizon must be positive");
  if (!g.contains(x0)) throw Error(Errc::outside_grid, "initial state lies outside the grid box");
  const auto alpha = flow_bound_per_dim(model, g);
  for (std::size_t a = 0; a < M::kStateDim; ++a)
    if (alpha[a] * opt.dt >= g.spacing(a))
      throw Error(Errc::invalid_argument, "rollout dt moves more than one grid cell per step");

  typename M::Disturbance d_rest{};
  for (std::size_t j = 0; j < M::kDisturbanceDim; ++j) d_rest[j] = std::clamp(0.0, model.d_lo[j], model.d_hi[j]);

  RolloutResult<M> out;
  const std::size_t every = std::max<std::size_t>(1, opt.record_every);
  const auto steps = static_cast<std::size_t>(std::llround(opt.horizon / opt.dt));
  typename M::State x = x0;
  for (std::size_t k = 0;; ++k) {
    const double lx = target.evaluate(x);
    out.min_target_value = std::min(out.min_target_value, lx);
    if (k % every == 0) out.trajectory.push_back(x);
    if (lx <= 0.0) {
      out.entered_target = true;
      break;
    }
    if (k == steps) break;

    typename M::Control u = policy.u;
    typename M::Disturbance d = d_rest;
    if (policy.kind == RolloutPolicy<M>::Kind::greedy || opt.adversarial) {
      const auto gv = interpolated_gradient(value, x);
      typename M::State grad{};
      std::copy(gv.begin(), gv.end(), grad.begin());
      const auto best = optimal_inputs(model, x, grad);
      if (policy.kind == RolloutPolicy<M>::Kind::greedy) u = best.u;
      if (opt.adversarial) d = best.d;
    }
    const auto xdot = eval_dynamics(model, x, u, d);
    for (std::size_t a = 0; a < M::kStateDim; ++a) x[a] += opt.dt * xdot[a];
    out.steps = k + 1;
    if (!g.contains(x)) {
      out.left_grid = true;
      out.trajectory.push_back(x);
      break;
    }
  }
  return out;
}

/// Nodes where mask and oracle disagree, counted only if they lie more than
/// band_cells (Chebyshev node distance) from the oracle's boundary. The
/// boundary is the set of nodes with an 8-neighbour of opposite oracle class.
inline std::size_t boundary_band_mismatch(const BrtMask& mask, const std::function<bool(double, double)>& oracle,
                                          std::size_t band_cells) {
  const RectGrid& g = mask.grid();
  if (g.ndim() != 2) throw Error(Errc::unsupported_dimension, "band mismatch is defined on 2-D grids");
  const std::size_t n0 = g.count(0), n1 = g.count(1);
  std::vector<std::uint8_t> truth(g.node_count());
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) truth[i * n1 + j] = oracle(g.coordinate(0, i), g.coordinate(1, j)) ? 1 : 0;

  // Multi-source BFS over the 8-neighbourhood yields Chebyshev distance.
  constexpr std::size_t unreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.node_count(), unreached);
  std::deque<std::size_t> queue;
  auto for_neighbours = [&](std::size_t i, std::size_t j, auto&& fn) {
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const long ii = static_cast<long>(i) + di, jj = static_cast<long>(j) + dj;
        if (ii < 0 || jj < 0 || ii >= static_cast<long>(n0) || jj >= static_cast<long>(n1)) continue;
        fn(static_cast<std::size_t>(ii) * n1 + static_cast<std::size_t>(jj));
      }
  };
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) {
      const std::size_t n = i * n1 + j;
      bool edge = false;
      for_neighbours(i, j, [&](std::size_t m) { edge = edge || truth[m] != truth[n]; });
      if (edge) {
        dist[n] = 0;
        queue.push_back(n);
      }
    }
  while (!queue.empty()) {
    const std::size_t n = queue.front();
    queue.pop_front();
    for_neighbours(n / n1, n % n1, [&](std::size_t m) {
      if (dist[m] == unreached) {
        dist[m] = dist[n] + 1;
        queue.push_back(m);
      }
    });
  }

  std::size_t count = 0;
  for (std::size_t n = 0; n < g.node_count(); ++n)
    if (mask[n] != (truth[n] != 0) && dist[n] > band_cells) ++count;
  return count;
}

}  // namespace warmreach
