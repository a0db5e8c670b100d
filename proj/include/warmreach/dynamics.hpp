#pragma once

// Control-affine dynamics  ẋ = f(x) + Σ_j g_j(x) u_j + Σ_j h_j(x) d_j  with
// box-bounded control u and disturbance d.

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "warmreach/error.hpp"
#include "warmreach/grid.hpp"
#include "warmreach/shapes.hpp"

namespace warmreach {

template <class M>
concept ControlAffineSystem = requires(const M& m, const typename M::State& x, std::size_t j,
                                       const RectGrid& g) {
  { M::kStateDim } -> std::convertible_to<std::size_t>;
  { M::kControlDim } -> std::convertible_to<std::size_t>;
  { M::kDisturbanceDim } -> std::convertible_to<std::size_t>;
  { m.drift(x) } -> std::same_as<typename M::State>;
  { m.control_column(x, j) } -> std::same_as<typename M::State>;
  { m.disturbance_column(x, j) } -> std::same_as<typename M::State>;
  { m.u_lo[0] } -> std::convertible_to<double>;
  { m.u_hi[0] } -> std::convertible_to<double>;
  { m.d_lo[0] } -> std::convertible_to<double>;
  { m.d_hi[0] } -> std::convertible_to<double>;
  m.check_domain(g);
};

/// Shared state/input storage for the concrete models.
template <std::size_t N, std::size_t NU, std::size_t ND>
struct AffineModelBase {
  static constexpr std::size_t kStateDim = N;
  static constexpr std::size_t kControlDim = NU;
  static constexpr std::size_t kDisturbanceDim = ND;
  using State = std::array<double, N>;
  using Control = std::array<double, NU>;
  using Disturbance = std::array<double, ND>;

  Control u_lo{}, u_hi{};
  Disturbance d_lo{}, d_hi{};

  void check_bounds() const {
    for (std::size_t j = 0; j < NU; ++j)
      if (!(u_lo[j] <= u_hi[j])) throw Error(Errc::empty_range, "control bounds require u_lo <= u_hi");
    for (std::size_t j = 0; j < ND; ++j)
      if (!(d_lo[j] <= d_hi[j])) throw Error(Errc::empty_range, "disturbance bounds require d_lo <= d_hi");
  }
};

/// ṗ = v + d,  v̇ = b·u.
struct DoubleIntegrator : AffineModelBase<2, 1, 1> {
  double b = 1.0;

  DoubleIntegrator(double gain = 1.0, Interval u = {-1.0, 1.0}, Interval d = {0.0, 0.0}) : b(gain) {
    u_lo = {u.lo};
    u_hi = {u.hi};
    d_lo = {d.lo};
    d_hi = {d.hi};
    check_bounds();
    if (!std::isfinite(b) || b == 0.0) throw Error(Errc::invalid_argument, "double integrator gain must be non-zero");
  }

  State drift(const State& x) const { return {x[1], 0.0}; }
  State control_column(const State&, std::size_t) const { return {0.0, b}; }
  State disturbance_column(const State&, std::size_t) const { return {1.0, 0.0}; }
  void check_domain(const RectGrid&) const {}
};

/// One translational subsystem of the near-hover quadcopter, states (p, v, θ, ω):
///   ṗ = v + d,  v̇ = g tan θ,  θ̇ = −d1 θ + ω,  ω̇ = −d0 θ + n0 S.
/// The x and y subsystems share this model.
struct Quad4D : AffineModelBase<4, 1, 1> {
  double g = 9.81;
  double d0 = 10.0;
  double d1 = 8.0;
  double n0 = 10.0;

  /// angle_bound_deg bounds the desired angle S; d_bound the wind on ṗ.
  Quad4D(double angle_bound_deg = 10.0, double d_bound = 1.0, double gravity = 9.81, double d0_ = 10.0,
         double d1_ = 8.0, double n0_ = 10.0)
      : g(gravity), d0(d0_), d1(d1_), n0(n0_) {
    const double s = angle_bound_deg * std::numbers::pi / 180.0;
    u_lo = {-s};
    u_hi = {s};
    d_lo = {-d_bound};
    d_hi = {d_bound};
    check_bounds();
    if (!(g > 0 && d0 > 0 && d1 > 0 && n0 > 0))
      throw Error(Errc::invalid_argument, "quadcopter parameters must be positive");
  }

  State drift(const State& x) const {
    return {x[1], g * std::tan(x[2]), -d1 * x[2] + x[3], -d0 * x[2]};
  }
  State control_column(const State&, std::size_t) const { return {0.0, 0.0, 0.0, n0}; }
  State disturbance_column(const State&, std::size_t) const { return {1.0, 0.0, 0.0, 0.0}; }

  void check_domain(const RectGrid& grid) const {
    if (grid.ndim() != kStateDim) return;
    const double half_pi = std::numbers::pi / 2.0;
    if (!(std::abs(grid.lo(2)) < half_pi && std::abs(grid.hi(2)) < half_pi))
      throw Error(Errc::unbounded_nonlinearity, "tan(theta) is unbounded: grid must keep |theta| < pi/2");
  }
};

/// Vertical subsystem, states (p_z, v_z):  ṗz = vz + dz,  v̇z = (kT/m) Tz − g.
struct Quad2D : AffineModelBase<2, 1, 1> {
  double g = 9.81;
  double kT = 4.55;
  double m = 5.0;

  Quad2D(double mass, Interval thrust, double dz_bound, double k_thrust = 4.55, double gravity = 9.81)
      : g(gravity), kT(k_thrust), m(mass) {
    u_lo = {thrust.lo};
    u_hi = {thrust.hi};
    d_lo = {-dz_bound};
    d_hi = {dz_bound};
    check_bounds();
    if (!(m > 0.0)) throw Error(Errc::invalid_argument, "mass must be positive");
  }

  /// Thrust box sized so that (kT / rated_mass)·Tz spans [0, 2g]. A heavier
  /// vehicle with the same motors therefore loses acceleration authority.
  static Quad2D with_rated_thrust(double mass, double dz_bound, double rated_mass = 5.0,
                                  double k_thrust = 4.55, double gravity = 9.81) {
    return Quad2D(mass, {0.0, 2.0 * gravity * rated_mass / k_thrust}, dz_bound, k_thrust, gravity);
  }

  State drift(const State& x) const { return {x[1], -g}; }
  State control_column(const State&, std::size_t) const { return {0.0, kT / m}; }
  State disturbance_column(const State&, std::size_t) const { return {1.0, 0.0}; }
  void check_domain(const RectGrid&) const {}
};

using AnyModel = std::variant<DoubleIntegrator, Quad4D, Quad2D>;

template <ControlAffineSystem M>
bool inputs_in_bounds(const M& model, const typename M::Control& u, const typename M::Disturbance& d) {
  for (std::size_t j = 0; j < M::kControlDim; ++j)
    if (!(u[j] >= model.u_lo[j] && u[j] <= model.u_hi[j])) return false;
  for (std::size_t j = 0; j < M::kDisturbanceDim; ++j)
    if (!(d[j] >= model.d_lo[j] && d[j] <= model.d_hi[j])) return false;
  return true;
}

/// Unchecked evaluation, for hot loops whose inputs come from the bounds.
template <ControlAffineSystem M>
typename M::State flow(const M& model, const typename M::State& x, const typename M::Control& u,
                       const typename M::Disturbance& d) {
  typename M::State xdot = model.drift(x);
  for (std::size_t j = 0; j < M::kControlDim; ++j) {
    const auto col = model.control_column(x, j);
    for (std::size_t i = 0; i < M::kStateDim; ++i) xdot[i] += col[i] * u[j];
  }
  for (std::size_t j = 0; j < M::kDisturbanceDim; ++j) {
    const auto col = model.disturbance_column(x, j);
    for (std::size_t i = 0; i < M::kStateDim; ++i) xdot[i] += col[i] * d[j];
  }
  return xdot;
}

template <ControlAffineSystem M>
typename M::State eval_dynamics(const M& model, const typename M::State& x, const typename M::Control& u,
                                const typename M::Disturbance& d) {
  if (!inputs_in_bounds(model, u, d)) throw Error(Errc::input_out_of_bounds, "input outside its box");
  for (double xi : x)
    if (!std::isfinite(xi)) throw Error(Errc::non_finite, "state must be finite");
  return flow(model, x, u, d);
}

/// Per-axis bound alpha_i ≥ |ẋ_i| over the grid box and both input boxes.
/// Every drift component of the supported models is monotone in each state
/// coordinate (affine terms and tan θ), so the extremes over the box are
/// attained at its corners; the input terms are maximised per sign.
template <ControlAffineSystem M>
std::vector<double> flow_bound_per_dim(const M& model, const RectGrid& grid) {
  constexpr std::size_t N = M::kStateDim;
  if (grid.ndim() != N) throw Error(Errc::dimension_mismatch, "grid and model dimensions differ");
  model.check_domain(grid);
  std::vector<double> alpha(N, 0.0);
  for (std::size_t corner = 0; corner < (std::size_t{1} << N); ++corner) {
    typename M::State x{};
    for (std::size_t a = 0; a < N; ++a) x[a] = (corner >> a) & 1u ? grid.hi(a) : grid.lo(a);
    const auto f = model.drift(x);
    typename M::State top = f, bottom = f;
    for (std::size_t j = 0; j < M::kControlDim; ++j) {
      const auto col = model.control_column(x, j);
      for (std::size_t i = 0; i < N; ++i) {
        const double a = col[i] * model.u_lo[j], b = col[i] * model.u_hi[j];
        top[i] += std::max(a, b);
        bottom[i] += std::min(a, b);
      }
    }
    for (std::size_t j = 0; j < M::kDisturbanceDim; ++j) {
      const auto col = model.disturbance_column(x, j);
      for (std::size_t i = 0; i < N; ++i) {
        const double a = col[i] * model.d_lo[j], b = col[i] * model.d_hi[j];
        top[i] += std::max(a, b);
        bottom[i] += std::min(a, b);
      }
    }
    for (std::size_t i = 0; i < N; ++i) {
      const double m = std::max(std::abs(top[i]), std::abs(bottom[i]));
      if (!std::isfinite(m)) throw Error(Errc::unbounded_nonlinearity, "flow is unbounded on the grid box");
      alpha[i] = std::max(alpha[i], m);
    }
  }
  return alpha;
}

}  // namespace warmreach
