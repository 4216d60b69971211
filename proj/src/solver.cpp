#include "viscowave/solver.hpp"

#include <cmath>
#include <sstream>

#include "viscowave/damping.hpp"
#include "viscowave/errors.hpp"

namespace viscowave {

Solver::Solver(const ProblemConfig& cfg) : cfg_(cfg) {
  if (cfg_.kernel) kernel_.emplace(*cfg_.kernel);
  conv_ = make_convolution(cfg_, kernel());
  state_.u = cfg_.u0;
  state_.u_prev = cfg_.u0;
  state_.v = cfg_.v0;
  state_.damping_force = Vector::Zero(cfg_.u0.size());
  if (conv_) conv_->push(gradient(state_.u, cfg_.grid.spacing()));
  state_.memory_term = Vector::Zero(cfg_.u0.size());
}

// D_A u - memory + k |u|^{p-2} u at the current step.
Vector Solver::residual_force(const Vector& u) const {
  const double h = cfg_.grid.spacing();
  Vector force = apply_div_grad(u, cfg_.A, h) - state_.memory_term;
  force.array() += cfg_.k.array() * u.array().abs().pow(cfg_.p - 2.0) * u.array();
  return force;
}

void Solver::step(const std::function<void(const StepView&)>& observer) {
  const double dt = cfg_.dt;
  const double h = cfg_.grid.spacing();
  const long n = state_.t_index;
  const Eigen::Index last = state_.u.size() - 1;

  if (conv_) state_.memory_term = divergence(cfg_.a.cwiseProduct(conv_->history_flux()), h);
  const Vector force = residual_force(state_.u);

  Vector next(state_.u.size());
  if (n == 0) {
    // Taylor start; equivalent to a ghost level u^{-1} = u^1 - 2 dt v^0.
    for (Eigen::Index i = 0; i <= last; ++i) state_.damping_force(i) = cfg_.b(i) * cfg_.damping(state_.v(i));
    next = state_.u + dt * state_.v + 0.5 * dt * dt * (force - state_.damping_force);
  } else {
    const Vector rhs = (state_.u - state_.u_prev) / dt + 0.5 * dt * force;
    for (Eigen::Index i = 0; i <= last; ++i) {
      state_.v(i) = solve_damping_pointwise(rhs(i), 0.5 * dt * cfg_.b(i), cfg_.damping);
      state_.damping_force(i) = cfg_.b(i) * cfg_.damping(state_.v(i));
    }
    next = 2.0 * state_.u - state_.u_prev + dt * dt * (force - state_.damping_force);
  }
  next(0) = 0.0;
  next(last) = 0.0;
  state_.v(0) = 0.0;
  state_.v(last) = 0.0;

  if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kBlowUpThreshold) {
    std::ostringstream msg;
    msg << "blow-up detected at step " << n + 1 << " (t=" << (n + 1) * dt << ")";
    throw BlowUpError(msg.str(), n + 1);
  }

  if (observer) {
    const Vector grad = gradient(state_.u, h);
    const MemoryFunctionals memory = conv_ ? conv_->functionals() : MemoryFunctionals{};
    observer(StepView{n, n * dt, state_.u, state_.v, grad, state_.damping_force, memory});
  }

  state_.u_prev.swap(state_.u);
  state_.u = std::move(next);
  state_.t_index = n + 1;
  if (conv_) conv_->push(gradient(state_.u, h));
}

}  // namespace viscowave
