#pragma once

// Avoid-orientation Hamiltonian  H(x, p) = max_u min_d ⟨p, f(x, u, d)⟩  for
// control-affine models, and its monotone Lax-Friedrichs approximation.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "warmreach/dynamics.hpp"
#include "warmreach/error.hpp"

namespace warmreach {

template <ControlAffineSystem M>
struct HamiltonianContext {
  const M* model = nullptr;
  std::vector<double> alphas;  // one global dissipation bound per state axis

  HamiltonianContext(const M& m, std::vector<double> a) : model(&m), alphas(std::move(a)) {
    if (alphas.size() != M::kStateDim) throw Error(Errc::dimension_mismatch, "one alpha per state axis");
    for (double x : alphas)
      if (!(x >= 0.0)) throw Error(Errc::invalid_argument, "alphas must be non-negative");
  }
};

template <ControlAffineSystem M>
HamiltonianContext<M> make_context(const M& model, const RectGrid& grid) {
  return HamiltonianContext<M>(model, flow_bound_per_dim(model, grid));
}

template <ControlAffineSystem M>
struct OptimalInputs {
  typename M::Control u{};
  typename M::Disturbance d{};
};

/// Bang-bang saddle point. The control maximises and the disturbance
/// minimises ⟨grad, ẋ⟩; a zero switching function picks u_hi and d_lo.
template <ControlAffineSystem M>
OptimalInputs<M> optimal_inputs(const M& model, const typename M::State& x, const typename M::State& grad) {
  OptimalInputs<M> out;
  for (std::size_t j = 0; j < M::kControlDim; ++j) {
    const auto col = model.control_column(x, j);
    double s = 0.0;
    for (std::size_t i = 0; i < M::kStateDim; ++i) s += grad[i] * col[i];
    out.u[j] = s >= 0.0 ? model.u_hi[j] : model.u_lo[j];
  }
  for (std::size_t j = 0; j < M::kDisturbanceDim; ++j) {
    const auto col = model.disturbance_column(x, j);
    double s = 0.0;
    for (std::size_t i = 0; i < M::kStateDim; ++i) s += grad[i] * col[i];
    out.d[j] = s >= 0.0 ? model.d_lo[j] : model.d_hi[j];
  }
  return out;
}

template <ControlAffineSystem M>
OptimalInputs<M> optimal_inputs(const HamiltonianContext<M>& ctx, const typename M::State& x,
                                const typename M::State& grad) {
  return optimal_inputs(*ctx.model, x, grad);
}

template <ControlAffineSystem M>
double hamiltonian_value(const M& model, const typename M::State& x, const typename M::State& grad) {
  const auto opt = optimal_inputs(model, x, grad);
  const auto xdot = flow(model, x, opt.u, opt.d);
  double h = 0.0;
  for (std::size_t i = 0; i < M::kStateDim; ++i) h += grad[i] * xdot[i];
  return h;
}

template <ControlAffineSystem M>
double hamiltonian_value(const HamiltonianContext<M>& ctx, const typename M::State& x,
                         const typename M::State& grad) {
  return hamiltonian_value(*ctx.model, x, grad);
}

/// Ĥ = H(x, (p⁻ + p⁺)/2) + Σ_i α_i (p⁺_i − p⁻_i)/2
///
/// Oriented for the backward update V ← V + dt·Ĥ: Ĥ is non-decreasing in p⁺
/// and non-increasing in p⁻ whenever α_i ≥ |∂H/∂p_i|, so the update is
/// monotone under the CFL bound.
template <ControlAffineSystem M>
double lax_friedrichs(const HamiltonianContext<M>& ctx, const typename M::State& x,
                      const typename M::State& grad_left, const typename M::State& grad_right) {
  typename M::State central{};
  double dissipation = 0.0;
  for (std::size_t i = 0; i < M::kStateDim; ++i) {
    central[i] = 0.5 * (grad_left[i] + grad_right[i]);
    dissipation += ctx.alphas[i] * 0.5 * (grad_right[i] - grad_left[i]);
  }
  return hamiltonian_value(*ctx.model, x, central) + dissipation;
}

}  // namespace warmreach
