#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "viscowave/convexity.hpp"
#include "viscowave/kernel.hpp"
#include "viscowave/problem.hpp"
#include "viscowave/solver.hpp"

namespace viscowave {

/// Everything the energy functionals need from a single step n.
struct EnergyCore {
  long n = 0;
  double t = 0.0;
  double E = 0.0;
  double bbE = 0.0;
  double source_term = 0.0;
  double grad_sq = 0.0;    // ||grad u||^2
  double a_grad_sq = 0.0;  // int a |grad u|^2
  double f_circ = 0.0;
  double mu = 0.0;
  double psi_integral = 0.0;
  double kernel_at_t = 0.0;
  double damping_power = 0.0;  // int b h(u_t) u_t
  double F3 = 0.0;
  double l2_u = 0.0;
  double l2_ut = 0.0;
  double Lambda = 0.0;

  /// Right-hand side of the energy rate identity at this step.
  double predicted_rate() const { return -0.5 * mu - 0.5 * kernel_at_t * a_grad_sq - damping_power; }
};

/// Per-run constants the energy core depends on.
struct EnergyContext {
  double ell = 0.0;
  double dt = 0.0;
  double p = 3.0;
  const Kernel* kernel = nullptr;
  double total_mass = 0.0;  // F(0)
};

EnergyContext make_energy_context(const ProblemConfig& cfg, const Kernel* kernel);

/// E, bbE and the diagnostics at the step described by `view`.
EnergyCore energy_core(const StepView& view, const ProblemConfig& cfg, const EnergyContext& ctx);

/// One recorded row; everything except psi_integral and grad_sq is written to trace.csv.
struct EnergySample {
  double t = 0.0;
  double E = 0.0;
  double bbE = 0.0;
  double Lambda = 0.0;
  double f_circ_grad = 0.0;
  double mu = 0.0;
  double dissipation_residual = 0.0;
  double F3 = 0.0;
  double source_term = 0.0;
  double l2_u = 0.0;
  double l2_ut = 0.0;
  double psi_integral = 0.0;
  double grad_sq = 0.0;
};

/// (E^{n+1} - E^{n-1})/(2 dt) minus the predicted rate at step n.
double dissipation_residual(const EnergyCore& prev, const EnergyCore& cur, const EnergyCore& next, double dt);
/// Second-order one-sided variant used at n = 0.
double dissipation_residual_start(const EnergyCore& c0, const EnergyCore& c1, const EnergyCore& c2, double dt);

EnergySample make_sample(const EnergyCore& core, double residual);

/// Computable bound L (L/2)^{r/2} >= B_r for w in H^1_0(0, L).
double sobolev_bound(double length, double r);

struct WellPosednessReport {
  double ell = 0.0;
  double B_p_bound = 0.0;
  double B = 0.0;
  double K = 0.0;
  double p = 3.0;
  double Lambda1 = 0.0;  // +inf when K = 0
  double E1 = 0.0;
  double E0 = 0.0;
  double Lambda0 = 0.0;
  double smallness_threshold = 0.0;
  double tilde_C = 0.0;
  double gate_relax = 1.0;
  bool lambda1_infinite = false;
  bool verdict = false;
};

/// Initial-data gate: E(0) < E1, Lambda(0) < Lambda1 and E(0) below the
/// smallness threshold (scaled by cfg.gate_relax).
WellPosednessReport wellposedness_gate(const ProblemConfig& cfg);

/// C~ = 2 K B L^{p-2} / (p - 2 K B L^{p-2}); +inf when the denominator is not positive.
double tilde_constant(double K, double B, double p, double Lambda);

/// Largest factor s in (0, 1] (by 60 bisection steps) for which the gate
/// passes with initial data s*(u0, v0); 1 when it already passes.
double gate_scale_factor(const ProblemConfig& cfg);

nlohmann::json to_json(const WellPosednessReport& r);

/// Recorded samples plus run metadata.
struct EnergyTrace {
  std::vector<EnergySample> samples;
  double dt = 0.0;
  int record_stride = 1;
  double q = 1.0;
  double p = 3.0;
  double ell = 0.0;
  WellPosednessReport gate;
  bool blow_up = false;
  long blow_up_step = -1;
  double max_abs_residual() const;
};

struct LambdaMonitorReport {
  bool asserted = false;  // only when the gate passed
  bool trivial = false;   // K = 0
  double max_ratio = 0.0;
  double max_Lambda = 0.0;
  bool pass = true;
};

LambdaMonitorReport lambda_monitor(const EnergyTrace& trace);

struct PotentialWellReport {
  bool asserted = false;
  double tilde_C_post = 0.0;   // C~ recomputed with max(Lambda(0), observed max Lambda)
  double tolerance = 0.0;
  int lower_bound_violations = 0;  // bbE >= (ell/2) ||grad u||^2
  int r1_violations = 0;           // source <= C~ E
  int r2_violations = 0;           // bbE <= (1 + C~) E(0)
  int lambda_violations = 0;       // Lambda < Lambda1
  bool pass() const {
    return lower_bound_violations == 0 && r1_violations == 0 && r2_violations == 0 && lambda_violations == 0;
  }
};

/// `tolerance` is relative to E(0).
PotentialWellReport potential_well_check(const EnergyTrace& trace, double tolerance = 1e-6);

/// Centered 5-point moving average (window shrinks at the ends).
std::vector<double> smooth5(const std::vector<double>& values);
/// Centered differences of the smoothed energy (one-sided at the ends).
std::vector<double> smoothed_energy_rate(const EnergyTrace& trace);

struct MonotonicityReport {
  double tolerance = 0.0;
  double max_increase = 0.0;
  double at_time = 0.0;
  int violations = 0;
  bool pass = true;
};

/// Smoothed E nonincreasing within `relative_tol` * E(0) between recorded steps.
MonotonicityReport monotonicity_check(const EnergyTrace& trace, double relative_tol = 1e-6);

struct RateBoundReport {
  double tolerance = 0.0;
  int checked = 0;
  int satisfied = 0;
  double fraction = 1.0;
  bool pass = true;
};

/// mu <= -2 (smoothed E') + tol with tol = 2 max|residual| + 1e-6 E(0), at
/// >= `required_fraction` of recorded steps.
RateBoundReport memory_rate_check(const EnergyTrace& trace, double required_fraction = 0.99);

struct JensenReport {
  int checked = 0;
  int satisfied = 0;
  int skipped = 0;    // psi integral below 1e-14
  int saturated = 0;  // G^{-1} out of range
  double fraction = 1.0;
  double max_ratio = 0.0;
  bool pass = true;
};

JensenReport jensen_bound_check(const EnergyTrace& trace, const ConvexityData& cx, double q,
                                double required_fraction = 0.99, double relative_slack = 1e-6);

nlohmann::json to_json(const LambdaMonitorReport& r);
nlohmann::json to_json(const PotentialWellReport& r);
nlohmann::json to_json(const MonotonicityReport& r);
nlohmann::json to_json(const RateBoundReport& r);
nlohmann::json to_json(const JensenReport& r);

}  // namespace viscowave
