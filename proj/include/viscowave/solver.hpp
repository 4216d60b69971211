#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "viscowave/convolution.hpp"
#include "viscowave/kernel.hpp"
#include "viscowave/problem.hpp"

namespace viscowave {

/// Solution at step n. `v` is the centered velocity (u^{n+1} - u^{n-1})/(2 dt)
/// once step n has been taken; before that it holds the initial velocity.
struct SimulationState {
  long t_index = 0;
  Vector u;
  Vector u_prev;
  Vector v;
  Vector damping_force;  // b .* h(v)
  Vector memory_term;    // divergence(a .* Gamma^n)
};

/// Quantities available in the middle of a step, after v^n is known and
/// before the history moves on to n+1.
struct StepView {
  long n = 0;
  double t = 0.0;
  const Vector& u;
  const Vector& v;
  const Vector& grad;
  const Vector& damping_force;
  MemoryFunctionals memory;
};

/// Values above this magnitude count as blow-up.
inline constexpr double kBlowUpThreshold = 1e100;

/// Leapfrog scheme with implicit pointwise damping and an explicitly lagged
/// memory term.
class Solver {
 public:
  explicit Solver(const ProblemConfig& cfg);

  const ProblemConfig& config() const { return cfg_; }
  const Kernel* kernel() const { return kernel_ ? &*kernel_ : nullptr; }
  const SimulationState& state() const { return state_; }
  double time() const { return state_.t_index * cfg_.dt; }

  /// Advances from t_n to t_{n+1}. The observer sees step n with its
  /// centered velocity. Throws BlowUpError on non-finite or runaway values.
  void step(const std::function<void(const StepView&)>& observer = {});

 private:
  Vector residual_force(const Vector& u) const;

  ProblemConfig cfg_;
  std::optional<Kernel> kernel_;
  std::unique_ptr<ConvolutionEvaluator> conv_;
  SimulationState state_;
};

}  // namespace viscowave
