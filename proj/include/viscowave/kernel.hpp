#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace viscowave {

enum class KernelFamily { shifted_exponential, stretched_exponential, power_law, tabulated };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Plain description of a relaxation kernel, as it appears in configs.
///
///   shifted-exponential   f(t) = alpha * exp(-beta * (1 + t))
///   stretched-exponential f(t) = alpha * exp(-t^beta),   0 < beta < 1
///   power-law             f(t) = alpha * (1 + t)^(-beta)
///   tabulated             monotone cubic through (t, f) samples, exponential tail
struct KernelSpec {
  KernelFamily family = KernelFamily::shifted_exponential;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::pair<double, double>> samples;
};

nlohmann::json to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

/// A validated kernel. Construction checks the family constraints and the
/// nonnegativity/monotonicity of f on a validation grid; tabulated kernels
/// additionally precompute their interpolation slopes and tail.
class Kernel {
 public:
  explicit Kernel(KernelSpec spec);

  const KernelSpec& spec() const { return spec_; }
  KernelFamily family() const { return spec_.family; }
  double alpha() const { return spec_.alpha; }
  double beta() const { return spec_.beta; }

  /// True when f is a single decaying exponential in t.
  bool is_exponential() const { return spec_.family == KernelFamily::shifted_exponential; }

  // Tabulated internals (empty for closed-form families).
  const Eigen::VectorXd& knots() const { return knots_; }
  const Eigen::VectorXd& knot_values() const { return values_; }
  const Eigen::VectorXd& knot_slopes() const { return slopes_; }
  double tail_rate() const { return tail_rate_; }
  const Eigen::VectorXd& knot_tail_mass() const { return tail_mass_; }

 private:
  void prepare_table();

  KernelSpec spec_;
  Eigen::VectorXd knots_, values_, slopes_, tail_mass_;
  double tail_rate_ = 0.0;
};

/// f(t).
double kernel_value(const Kernel& k, double t);
/// f'(t); throws SingularDerivativeError at t = 0 for the stretched family.
double kernel_slope(const Kernel& k, double t);
/// F(t) = integral of f over [t, inf).
double tail_mass(const Kernel& k, double t);
/// The residual stiffness lambda0 - a_sup * integral_0^inf f (no sign check).
double residual_stiffness(const Kernel& k, double a_sup, double lambda0);
/// K_delta(s) = -f'(s)/f(s) + delta.
double shifted_log_decay(const Kernel& k, double delta, double s);
/// M(delta) = integral_0^inf f(s)/K_delta(s) ds.
double damped_mass(const Kernel& k, double delta);

struct KernelAnalysis {
  double ell = 0.0;
  double f0 = 0.0;
  double total_mass = 0.0;
  double lambda0 = 1.0;
  double a_sup = 0.0;
  std::vector<std::pair<double, double>> tail_table;   // (t, F(t))
  std::vector<std::pair<double, double>> damped_table;  // (delta, M(delta))
  bool monotone = true;
};

KernelAnalysis analyze_kernel(const Kernel& k, double a_sup, double lambda0,
                              const std::vector<double>& deltas = {1e-1, 1e-2, 1e-3, 1e-4},
                              double horizon = 50.0, int tail_points = 51);

nlohmann::json to_json(const KernelAnalysis& a);

/// Upper incomplete gamma function Gamma(a, x) for a > 0, x >= 0.
double upper_incomplete_gamma(double a, double x);

}  // namespace viscowave
