#include "viscowave/convolution.hpp"

#include <algorithm>
#include <cmath>

#include "viscowave/errors.hpp"

namespace viscowave {

DirectConvolution::DirectConvolution(const Kernel& kernel, const Vector& a, double h, double dt, long max_steps)
    : quad_(h * a), dt_(dt), history_(a.size(), max_steps + 1) {
  f_.resize(max_steps + 1);
  fprime_.resize(max_steps + 1);
  for (long k = 0; k <= max_steps; ++k) {
    f_(k) = kernel_value(kernel, k * dt);
    fprime_(k) = k == 0 ? 0.0 : kernel_slope(kernel, k * dt);
  }
}

double DirectConvolution::weight(long m) const {
  const long n = count_ - 1;
  return (m == 0 || m == n) ? 0.5 * dt_ : dt_;
}

void DirectConvolution::push(const Vector& grad) {
  if (count_ >= history_.cols()) throw NumericalError("convolution history capacity exceeded");
  if (grad.size() != history_.rows()) throw NumericalError("convolution history length mismatch");
  history_.col(count_++) = grad;
}

Vector DirectConvolution::history_flux() const {
  const long n = count_ - 1;
  if (n <= 0) return Vector::Zero(history_.rows());
  Eigen::VectorXd w(n + 1);
  for (long m = 0; m <= n; ++m) w(m) = weight(m) * f_(n - m);
  return history_.leftCols(n + 1) * w;
}

MemoryFunctionals DirectConvolution::functionals() const {
  MemoryFunctionals out;
  const long n = count_ - 1;
  if (n <= 0) return out;
  const auto current = history_.col(n);
  for (long m = 0; m < n; ++m) {
    const double norm = quad_.dot((current - history_.col(m)).cwiseAbs2());
    const double w = weight(m);
    out.f_circ += w * f_(n - m) * norm;
    out.mu -= w * fprime_(n - m) * norm;
    out.psi_integral += w * norm;
  }
  return out;
}

std::vector<PronyMode> prony_modes(const Kernel& kernel) {
  if (!kernel.is_exponential())
    throw UnsupportedStrategyError("prony convolution requires an exponential kernel, got " +
                                   to_string(kernel.family()));
  return {PronyMode{kernel.alpha() * std::exp(-kernel.beta()), kernel.beta()}};
}

PronyConvolution::PronyConvolution(std::vector<PronyMode> modes, const Vector& a, double h, double dt)
    : modes_(std::move(modes)), quad_(h * a), dt_(dt) {
  for (const auto& mode : modes_) {
    if (!(mode.rate >= 0.0)) throw DomainError("prony mode rate must be nonnegative");
    acc_.push_back(Accumulator{std::exp(-mode.rate * dt), 0.0, Vector::Zero(a.size()), 0.0});
  }
  plain_ = Accumulator{1.0, 0.0, Vector::Zero(a.size()), 0.0};
}

// X^n = e^{-r dt} (X^{n-1} + dt/2 x^{n-1}) + dt/2 x^n, X^0 = 0.
void PronyConvolution::advance(Accumulator& acc, const Vector& grad, double norm) const {
  const double half = 0.5 * dt_;
  if (count_ == 0) return;
  acc.s = acc.decay * (acc.s + half) + half;
  acc.p = acc.decay * (acc.p + half * last_grad_) + half * grad;
  acc.q = acc.decay * (acc.q + half * last_norm_) + half * norm;
}

void PronyConvolution::push(const Vector& grad) {
  const double norm = quad_.dot(grad.cwiseAbs2());
  for (auto& acc : acc_) advance(acc, grad, norm);
  advance(plain_, grad, norm);
  last_grad_ = grad;
  last_norm_ = norm;
  ++count_;
}

Vector PronyConvolution::history_flux() const {
  Vector out = Vector::Zero(quad_.size());
  for (std::size_t j = 0; j < modes_.size(); ++j) out += modes_[j].weight * acc_[j].p;
  return out;
}

MemoryFunctionals PronyConvolution::functionals() const {
  MemoryFunctionals out;
  if (count_ <= 1) return out;
  auto expand = [&](const Accumulator& acc) {
    const double cross = quad_.dot(last_grad_.cwiseProduct(acc.p));
    return std::max(0.0, acc.s * last_norm_ - 2.0 * cross + acc.q);
  };
  for (std::size_t j = 0; j < modes_.size(); ++j) {
    const double value = expand(acc_[j]);
    out.f_circ += modes_[j].weight * value;
    out.mu += modes_[j].weight * modes_[j].rate * value;
  }
  out.psi_integral = expand(plain_);
  return out;
}

std::unique_ptr<ConvolutionEvaluator> make_convolution(const ProblemConfig& cfg, const Kernel* kernel) {
  if (kernel == nullptr) return nullptr;
  const double h = cfg.grid.spacing();
  if (cfg.strategy == ConvolutionStrategy::prony)
    return std::make_unique<PronyConvolution>(prony_modes(*kernel), cfg.a, h, cfg.dt);
  return std::make_unique<DirectConvolution>(*kernel, cfg.a, h, cfg.dt, cfg.steps() + 2);
}

}  // namespace viscowave
