#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "viscowave/grid.hpp"
#include "viscowave/kernel.hpp"

namespace viscowave {

inline constexpr int kSchemaVersion = 1;

enum class ConvolutionStrategy { direct, prony };

std::string to_string(ConvolutionStrategy s);
ConvolutionStrategy strategy_from_string(const std::string& name);

/// Canonical nonlinear damping: h(s) = scale*s for |s| > 1 and
/// scale*s|s|^(q-1) for |s| <= 1.
struct DampingSpec {
  double q = 1.0;
  double scale = 1.0;

  double operator()(double s) const;
  double derivative(double s) const;
};

/// Fully resolved problem: coefficient fields are sampled on the grid
/// (A and a at flux midpoints, b and k at nodes).
struct ProblemConfig {
  Grid grid;
  double dt = 0.0;
  double t_end = 0.0;
  Vector A, a, b, k;
  double p = 3.0;
  DampingSpec damping;
  std::optional<KernelSpec> kernel;
  Vector u0, v0;
  ConvolutionStrategy strategy = ConvolutionStrategy::direct;
  int record_stride = 1;
  double gate_relax = 1.0;
  nlohmann::json source;  // the JSON this config was parsed from

  long steps() const;
  double lambda0() const { return A.minCoeff(); }
  double mu0() const { return A.maxCoeff(); }
  double a_sup() const { return a.maxCoeff(); }
  double k_sup() const { return k.maxCoeff(); }
};

/// Parses a run configuration. Coefficient fields accept a number, a preset
/// object ({"preset": "constant"|"bump"|"ramp", ...}) or a sampled array.
ProblemConfig problem_from_json(const nlohmann::json& j);

/// Resolved form: every field written out as a sampled array.
nlohmann::json to_json(const ProblemConfig& cfg);

struct CflReport {
  bool pass = false;
  double dt = 0.0;
  double max_dt = 0.0;
  std::string message;
};

/// dt <= 0.9 h / sqrt(mu0).
CflReport cfl_check(const ProblemConfig& cfg);

/// Hypotheses on coefficients, damping, kernel, and data; one line per
/// violation, empty when everything holds.
std::vector<std::string> validate_assumptions(const ProblemConfig& cfg);

}  // namespace viscowave
