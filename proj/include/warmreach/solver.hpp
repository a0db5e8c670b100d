#pragma once

// Infinite-horizon avoid solver. The value function is marched backward in
// time with the clamped update
//     V ← min(V + dt·Ĥ(x, D⁻V, D⁺V), l)
// in forward-Euler substeps bounded by the CFL step; a fixed macro step
// (default 0.01) groups substeps and carries the convergence test
// max |ΔV| < threshold. Three initialisations are supported: standard (l),
// warm start (min(k, l)) and discounted (k, with V ← min(γV, l) per macro step).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "warmreach/dynamics.hpp"
#include "warmreach/error.hpp"
#include "warmreach/grid.hpp"
#include "warmreach/hamiltonian.hpp"
#include "warmreach/parallel.hpp"

namespace warmreach {

struct Standard {};
struct WarmStart {
  ScalarField seed;
};
struct Discounted {
  ScalarField seed;
  double gamma = 0.999;
  bool anneal = true;
};
using SolveMode = std::variant<Standard, WarmStart, Discounted>;

inline std::string mode_name(const SolveMode& mode) {
  switch (mode.index()) {
    case 0: return "standard";
    case 1: return "warm";
    default: return "discounted";
  }
}

struct SolveConfig {
  double macro_dt = 0.01;
  double threshold = 0.001;
  double cfl = 0.5;
  std::size_t max_macro_steps = 1000;

  void validate() const {
    if (!(macro_dt > 0.0)) throw Error(Errc::invalid_argument, "macro_dt must be positive");
    if (!(threshold > 0.0)) throw Error(Errc::invalid_argument, "threshold must be positive");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw Error(Errc::invalid_argument, "cfl must lie in (0, 1]");
  }
};

struct SolveResult {
  ScalarField value;
  std::size_t steps = 0;
  std::vector<double> residuals;
  double wall_time = 0.0;  // seconds
  bool converged = false;
  std::vector<double> gamma_history;
};

/// Called after every macro step with the 1-based step number and the iterate.
using StepObserver = std::function<void(std::size_t, const ScalarField&)>;

inline ScalarField init_field(const SolveMode& mode, const ScalarField& l) {
  if (const auto* w = std::get_if<WarmStart>(&mode)) {
    require_same_grid(w->seed, l);
    std::vector<double> v(l.size());
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = std::min(w->seed[n], l[n]);
    return ScalarField(l.grid(), std::move(v), "V_k");
  }
  if (const auto* d = std::get_if<Discounted>(&mode)) {
    require_same_grid(d->seed, l);
    if (!(d->gamma > 0.0 && d->gamma <= 1.0)) throw Error(Errc::invalid_argument, "gamma must lie in (0, 1]");
    return d->seed.relabeled("V_gamma");
  }
  return l.relabeled("V_l");
}

namespace detail {
template <ControlAffineSystem M>
void check_dims(const HamiltonianContext<M>&, const RectGrid& grid) {
  if (grid.ndim() != M::kStateDim) throw Error(Errc::dimension_mismatch, "grid and model dimensions differ");
}

/// Boundary closure. Edge nodes take the extrapolated one-sided difference,
/// except along an axis whose optimal flow points out of the grid: there no
/// information can arrive from outside, so that axis contributes a zero
/// gradient. Pure extrapolation makes the outflow update non-monotone.
template <ControlAffineSystem M, std::size_t N>
void close_outflow_edges(const M& model, const typename M::State& x, const std::array<std::size_t, N>& idx,
                         const std::array<std::size_t, N>& count, typename M::State& gl, typename M::State& gr) {
  typename M::State c{};
  for (std::size_t a = 0; a < N; ++a) c[a] = 0.5 * (gl[a] + gr[a]);
  const auto opt = optimal_inputs(model, x, c);
  const auto f = flow(model, x, opt.u, opt.d);
  for (std::size_t a = 0; a < N; ++a) {
    const bool leaving = (idx[a] == 0 && f[a] < 0.0) || (idx[a] + 1 == count[a] && f[a] > 0.0);
    if (leaving) gl[a] = gr[a] = 0.0;
  }
}

template <std::size_t N>
bool on_edge(const std::array<std::size_t, N>& idx, const std::array<std::size_t, N>& count) {
  for (std::size_t a = 0; a < N; ++a)
    if (idx[a] == 0 || idx[a] + 1 == count[a]) return true;
  return false;
}

/// One clamped Lax-Friedrichs substep on raw buffers.
template <ControlAffineSystem M>
void substep_kernel(const HamiltonianContext<M>& ctx, const RectGrid& grid, std::span<const double> v,
                    std::span<const double> l, double dt, std::span<double> out) {
  constexpr std::size_t N = M::kStateDim;
  std::array<std::size_t, N> count{}, stride{};
  std::array<double, N> h{}, lo{};
  for (std::size_t a = 0; a < N; ++a) {
    count[a] = grid.count(a);
    stride[a] = grid.stride(a);
    h[a] = grid.spacing(a);
    lo[a] = grid.lo(a);
  }
  parallel_for(grid.node_count(), [&](std::size_t begin, std::size_t end) {
    std::array<std::size_t, N> idx{};
    typename M::State x{}, gl{}, gr{};
    {
      std::size_t rem = begin;
      for (std::size_t a = N; a-- > 0;) {
        idx[a] = rem % count[a];
        rem /= count[a];
      }
      for (std::size_t a = 0; a < N; ++a) x[a] = lo[a] + static_cast<double>(idx[a]) * h[a];
    }
    for (std::size_t n = begin; n < end; ++n) {
      for (std::size_t a = 0; a < N; ++a) {
        const std::size_t j = idx[a], s = stride[a];
        if (j == 0) {
          gl[a] = gr[a] = (v[n + s] - v[n]) / h[a];
        } else if (j + 1 == count[a]) {
          gl[a] = gr[a] = (v[n] - v[n - s]) / h[a];
        } else {
          gl[a] = (v[n] - v[n - s]) / h[a];
          gr[a] = (v[n + s] - v[n]) / h[a];
        }
      }
      if (on_edge(idx, count)) close_outflow_edges(*ctx.model, x, idx, count, gl, gr);
      out[n] = std::min(v[n] + dt * lax_friedrichs(ctx, x, gl, gr), l[n]);
      for (std::size_t a = N; a-- > 0;) {
        if (++idx[a] < count[a]) {
          x[a] = lo[a] + static_cast<double>(idx[a]) * h[a];
          break;
        }
        idx[a] = 0;
        x[a] = lo[a];
      }
    }
  });
}

inline bool all_zero(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; });
}

}  // namespace detail

/// Largest admissible substep for ctx on grid, or +inf for zero dynamics.
template <ControlAffineSystem M>
double substep_limit(const HamiltonianContext<M>& ctx, const RectGrid& grid, double cfl) {
  if (detail::all_zero(ctx.alphas)) return std::numeric_limits<double>::infinity();
  return cfl_timestep(ctx.alphas, grid, cfl);
}

/// Ṽ = V + dt·Ĥ, then min(Ṽ, l). dt_sub must respect the CFL bound at cfl = 1,
/// the limit of monotonicity for the scheme.
template <ControlAffineSystem M>
ScalarField vi_substep(const ScalarField& v, const ScalarField& l, const HamiltonianContext<M>& ctx,
                       double dt_sub) {
  require_same_grid(v, l);
  detail::check_dims(ctx, v.grid());
  const double limit = substep_limit(ctx, v.grid(), 1.0);
  if (!(dt_sub > 0.0) || dt_sub > limit * (1.0 + 1e-12))
    throw Error(Errc::cfl_violation, "substep " + std::to_string(dt_sub) + " exceeds CFL limit " +
                                         std::to_string(limit));
  std::vector<double> out(v.size());
  detail::substep_kernel(ctx, v.grid(), v.values(), l.values(), dt_sub, out);
  return ScalarField(v.grid(), std::move(out), v.label());
}

struct MacroStepResult {
  ScalarField value;
  double residual = 0.0;
};

template <ControlAffineSystem M>
MacroStepResult macro_step(const ScalarField& v, const ScalarField& l, const HamiltonianContext<M>& ctx,
                           const SolveConfig& config, double gamma = 1.0) {
  config.validate();
  require_same_grid(v, l);
  detail::check_dims(ctx, v.grid());
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(Errc::invalid_argument, "gamma must lie in (0, 1]");
  const RectGrid& grid = v.grid();
  const double limit = substep_limit(ctx, grid, config.cfl);

  std::vector<double> cur(v.values().begin(), v.values().end());
  std::vector<double> next(cur.size());
  double remaining = config.macro_dt;
  while (remaining > 0.0) {
    double dt = std::min(limit, remaining);
    // Avoid a vanishing tail substep produced by rounding.
    if (remaining - dt < 1e-12 * config.macro_dt) dt = remaining;
    detail::substep_kernel(ctx, grid, cur, l.values(), dt, next);
    cur.swap(next);
    remaining -= dt;
  }
  if (gamma < 1.0)
    for (std::size_t n = 0; n < cur.size(); ++n) cur[n] = std::min(gamma * cur[n], l[n]);

  double residual = 0.0;
  for (std::size_t n = 0; n < cur.size(); ++n) residual = std::max(residual, std::abs(cur[n] - v[n]));
  return {ScalarField(grid, std::move(cur), v.label()), residual};
}

template <ControlAffineSystem M>
SolveResult run(const SolveMode& mode, const ScalarField& l, const HamiltonianContext<M>& ctx,
                const SolveConfig& config, const StepObserver& observer = {}) {
  config.validate();
  detail::check_dims(ctx, l.grid());
  const auto start = std::chrono::steady_clock::now();

  SolveResult result;
  result.value = init_field(mode, l);
  double gamma = 1.0;
  bool anneal = false;
  if (const auto* d = std::get_if<Discounted>(&mode)) {
    gamma = d->gamma;
    anneal = d->anneal;
  }
  while (result.steps < config.max_macro_steps) {
    auto [value, residual] = macro_step(result.value, l, ctx, config, gamma);
    result.value = std::move(value);
    ++result.steps;
    result.residuals.push_back(residual);
    result.gamma_history.push_back(gamma);
    if (observer) observer(result.steps, result.value);
    if (residual < config.threshold) {
      if (anneal && gamma < 1.0) {
        gamma = 1.0;
        continue;
      }
      result.converged = true;
      break;
    }
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

template <ControlAffineSystem M>
SolveResult run(const SolveMode& mode, const ScalarField& l, const M& model, const SolveConfig& config,
                const StepObserver& observer = {}) {
  const auto ctx = make_context(model, l.grid());
  return run(mode, l, ctx, config, observer);
}

/// Boolean classification of the sub-zero set {x : V(x) ≤ 0}.
class BrtMask {
 public:
  BrtMask() = default;
  BrtMask(RectGrid grid, std::vector<std::uint8_t> inside) : grid_(std::move(grid)), inside_(std::move(inside)) {
    if (inside_.size() != grid_.node_count()) throw Error(Errc::dimension_mismatch, "mask size mismatch");
  }

  const RectGrid& grid() const noexcept { return grid_; }
  bool operator[](std::size_t n) const { return inside_[n] != 0; }
  std::size_t size() const noexcept { return inside_.size(); }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), std::uint8_t{1}));
  }
  bool empty() const { return count() == 0; }

  /// True if every node inside `other` is also inside this mask.
  bool contains(const BrtMask& other) const {
    if (!(grid_ == other.grid_)) throw Error(Errc::grid_mismatch, "masks live on different grids");
    for (std::size_t n = 0; n < inside_.size(); ++n)
      if (other.inside_[n] && !inside_[n]) return false;
    return true;
  }

  friend bool operator==(const BrtMask&, const BrtMask&) = default;

 private:
  RectGrid grid_;
  std::vector<std::uint8_t> inside_;
};

inline BrtMask extract_brt(const ScalarField& v) {
  std::vector<std::uint8_t> inside(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) inside[n] = v[n] <= 0.0 ? 1 : 0;
  return BrtMask(v.grid(), std::move(inside));
}

/// Central-difference gradient at node n (one-sided on the grid edges).
inline std::vector<double> node_gradient(const ScalarField& v, std::size_t n) {
  const RectGrid& g = v.grid();
  std::vector<double> grad(g.ndim());
  for (std::size_t a = 0; a < g.ndim(); ++a) {
    const std::size_t j = g.axis_index(n, a), s = g.stride(a);
    const double h = g.spacing(a);
    if (j == 0)
      grad[a] = (v[n + s] - v[n]) / h;
    else if (j + 1 == g.count(a))
      grad[a] = (v[n] - v[n - s]) / h;
    else
      grad[a] = (v[n + s] - v[n - s]) / (2.0 * h);
  }
  return grad;
}

namespace detail {

/// Calls fn(node, weight) for the 2^N corners of the cell containing x.
template <class Fn>
void for_each_cell_corner(const RectGrid& g, std::span<const double> x, Fn&& fn) {
  const std::size_t nd = g.ndim();
  if (!g.contains(x)) throw Error(Errc::outside_grid, "state lies outside the grid box");
  std::vector<std::size_t> base(nd);
  std::vector<double> t(nd);
  for (std::size_t a = 0; a < nd; ++a) {
    const double u = (x[a] - g.lo(a)) / g.spacing(a);
    auto j = static_cast<std::size_t>(std::floor(u));
    j = std::min(j, g.count(a) - 2);
    base[a] = j;
    t[a] = std::clamp(u - static_cast<double>(j), 0.0, 1.0);
  }
  for (std::size_t corner = 0; corner < (std::size_t{1} << nd); ++corner) {
    double w = 1.0;
    std::size_t n = 0;
    for (std::size_t a = 0; a < nd; ++a) {
      const bool up = (corner >> a) & 1u;
      w *= up ? t[a] : 1.0 - t[a];
      n += (base[a] + (up ? 1 : 0)) * g.stride(a);
    }
    if (w != 0.0) fn(n, w);
  }
}

}  // namespace detail

/// Multilinear interpolation of V at an off-grid state.
inline double interpolate(const ScalarField& v, std::span<const double> x) {
  double out = 0.0;
  detail::for_each_cell_corner(v.grid(), x, [&](std::size_t n, double w) { out += w * v[n]; });
  return out;
}

/// Multilinear interpolation of the node gradients at x.
inline std::vector<double> interpolated_gradient(const ScalarField& v, std::span<const double> x) {
  std::vector<double> grad(v.grid().ndim(), 0.0);
  detail::for_each_cell_corner(v.grid(), x, [&](std::size_t n, double w) {
    const auto gn = node_gradient(v, n);
    for (std::size_t a = 0; a < gn.size(); ++a) grad[a] += w * gn[a];
  });
  return grad;
}

/// Instantaneous safety-preserving control at x from the value function.
template <ControlAffineSystem M>
typename M::Control optimal_control_at(const M& model, const ScalarField& v, const typename M::State& x) {
  if (v.grid().ndim() != M::kStateDim) throw Error(Errc::dimension_mismatch, "grid and model dimensions differ");
  const auto g = interpolated_gradient(v, x);
  typename M::State grad{};
  std::copy(g.begin(), g.end(), grad.begin());
  return optimal_inputs(model, x, grad).u;
}

}  // namespace warmreach
