#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "viscowave/kernel.hpp"
#include "viscowave/problem.hpp"

namespace viscowave {

/// History functionals at the current step t_n:
///   f_circ        sum_m w_m f(t_n - t_m)  ||g^n - g^m||_a^2
///   mu           -sum_m w_m f'(t_n - t_m) ||g^n - g^m||_a^2
///   psi_integral  sum_m w_m               ||g^n - g^m||_a^2
/// with trapezoid weights w_0 = w_n = dt/2 and ||x||_a^2 = h sum a x^2.
struct MemoryFunctionals {
  double f_circ = 0.0;
  double mu = 0.0;
  double psi_integral = 0.0;
};

/// Trapezoid-in-time evaluator of the hereditary integral, fed one midpoint
/// gradient per step. After the (n+1)-th push the evaluator sits at t_n.
class ConvolutionEvaluator {
 public:
  virtual ~ConvolutionEvaluator() = default;

  virtual void push(const Vector& grad) = 0;
  /// Gamma^n = sum_m w_m f(t_n - t_m) g^m at flux midpoints. The memory term
  /// is divergence(a .* Gamma^n).
  virtual Vector history_flux() const = 0;
  virtual MemoryFunctionals functionals() const = 0;
  /// Index n of the current step (-1 before the first push).
  virtual long current_step() const = 0;
};

/// Stores the whole gradient history; O(cells * n) per step.
class DirectConvolution : public ConvolutionEvaluator {
 public:
  DirectConvolution(const Kernel& kernel, const Vector& a, double h, double dt, long max_steps);

  void push(const Vector& grad) override;
  Vector history_flux() const override;
  MemoryFunctionals functionals() const override;
  long current_step() const override { return count_ - 1; }

 private:
  double weight(long m) const;

  Eigen::VectorXd f_, fprime_;  // f(k dt), f'(k dt); f'(0) unused
  Vector quad_;                 // h * a
  double dt_;
  Eigen::MatrixXd history_;
  long count_ = 0;
};

/// One exponential mode weight * exp(-rate t).
struct PronyMode {
  double weight = 0.0;
  double rate = 0.0;
};

/// Modes of an exactly exponential kernel; throws UnsupportedStrategyError otherwise.
std::vector<PronyMode> prony_modes(const Kernel& kernel);

/// Recursive evaluator for sums of exponentials; O(cells * modes) per step.
class PronyConvolution : public ConvolutionEvaluator {
 public:
  PronyConvolution(std::vector<PronyMode> modes, const Vector& a, double h, double dt);

  void push(const Vector& grad) override;
  Vector history_flux() const override;
  MemoryFunctionals functionals() const override;
  long current_step() const override { return count_ - 1; }

 private:
  // Accumulators of sum_m w_m e^{-rate (t_n - t_m)} x^m for x = 1, g, ||g||_a^2.
  struct Accumulator {
    double decay = 1.0;
    double s = 0.0;
    Vector p;
    double q = 0.0;
  };
  void advance(Accumulator& acc, const Vector& grad, double norm) const;

  std::vector<PronyMode> modes_;
  std::vector<Accumulator> acc_;
  Accumulator plain_;  // rate 0, for the psi integral
  Vector quad_;
  double dt_;
  Vector last_grad_;
  double last_norm_ = 0.0;
  long count_ = 0;
};

/// Evaluator selected by the config; null when the config has no kernel.
std::unique_ptr<ConvolutionEvaluator> make_convolution(const ProblemConfig& cfg, const Kernel* kernel);

}  // namespace viscowave
