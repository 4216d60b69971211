#include "viscowave/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "viscowave/errors.hpp"

namespace viscowave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double source_integral(const Vector& u, const Vector& k, double p, double h) {
  const Vector density = (k.array() * u.array().abs().pow(p)).matrix();
  return nodal_dot(density, Vector::Ones(u.size()), h) / p;
}

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

EnergyContext make_energy_context(const ProblemConfig& cfg, const Kernel* kernel) {
  EnergyContext ctx;
  ctx.dt = cfg.dt;
  ctx.p = cfg.p;
  ctx.kernel = kernel;
  ctx.ell = kernel ? residual_stiffness(*kernel, cfg.a_sup(), cfg.lambda0()) : cfg.lambda0();
  ctx.total_mass = kernel ? tail_mass(*kernel, 0.0) : 0.0;
  return ctx;
}

EnergyCore energy_core(const StepView& view, const ProblemConfig& cfg, const EnergyContext& ctx) {
  const double h = cfg.grid.spacing();
  EnergyCore c;
  c.n = view.n;
  c.t = view.t;
  const double kinetic = 0.5 * nodal_dot(view.v, view.v, h);
  const double elastic = 0.5 * midpoint_dot(view.grad, view.grad, cfg.A, h);
  c.a_grad_sq = midpoint_dot(view.grad, view.grad, cfg.a, h);
  c.grad_sq = h * view.grad.squaredNorm();
  double memory_mass = 0.0;
  if (ctx.kernel) {
    memory_mass = ctx.total_mass - tail_mass(*ctx.kernel, view.t);
    c.kernel_at_t = kernel_value(*ctx.kernel, view.t);
  }
  c.f_circ = view.memory.f_circ;
  c.mu = view.memory.mu;
  c.psi_integral = view.memory.psi_integral;
  c.source_term = source_integral(view.u, cfg.k, cfg.p, h);
  c.bbE = kinetic + elastic - 0.5 * memory_mass * c.a_grad_sq + 0.5 * c.f_circ;
  c.E = c.bbE - c.source_term;
  c.damping_power = nodal_dot(view.damping_force, view.v, h);
  c.F3 = nodal_dot(view.v, view.u, h);
  c.l2_u = std::sqrt(nodal_dot(view.u, view.u, h));
  c.l2_ut = std::sqrt(2.0 * kinetic);
  c.Lambda = std::sqrt(ctx.ell * c.grad_sq + c.f_circ);
  return c;
}

double dissipation_residual(const EnergyCore& prev, const EnergyCore& cur, const EnergyCore& next, double dt) {
  return (next.E - prev.E) / (2.0 * dt) - cur.predicted_rate();
}

double dissipation_residual_start(const EnergyCore& c0, const EnergyCore& c1, const EnergyCore& c2, double dt) {
  return (-3.0 * c0.E + 4.0 * c1.E - c2.E) / (2.0 * dt) - c0.predicted_rate();
}

EnergySample make_sample(const EnergyCore& c, double residual) {
  EnergySample s;
  s.t = c.t;
  s.E = c.E;
  s.bbE = c.bbE;
  s.Lambda = c.Lambda;
  s.f_circ_grad = c.f_circ;
  s.mu = c.mu;
  s.dissipation_residual = residual;
  s.F3 = c.F3;
  s.source_term = c.source_term;
  s.l2_u = c.l2_u;
  s.l2_ut = c.l2_ut;
  s.psi_integral = c.psi_integral;
  s.grad_sq = c.grad_sq;
  return s;
}

double sobolev_bound(double length, double r) {
  if (!(r >= 2.0)) throw DomainError("Sobolev exponent r must be >= 2");
  if (!(length > 0.0)) throw DomainError("domain length must be positive");
  return length * std::pow(0.5 * length, 0.5 * r);
}

double tilde_constant(double K, double B, double p, double Lambda) {
  const double x = 2.0 * K * B * std::pow(Lambda, p - 2.0);
  if (!(p - x > 0.0)) return kInf;
  return x / (p - x);
}

WellPosednessReport wellposedness_gate(const ProblemConfig& cfg) {
  WellPosednessReport r;
  const double h = cfg.grid.spacing();
  std::optional<Kernel> kernel;
  if (cfg.kernel) kernel.emplace(*cfg.kernel);
  r.ell = kernel ? residual_stiffness(*kernel, cfg.a_sup(), cfg.lambda0()) : cfg.lambda0();
  r.p = cfg.p;
  r.K = cfg.k_sup();
  r.gate_relax = cfg.gate_relax;
  r.B_p_bound = sobolev_bound(cfg.grid.length, cfg.p);

  const Vector g = gradient(cfg.u0, h);
  const double grad_sq = h * g.squaredNorm();
  r.E0 = 0.5 * nodal_dot(cfg.v0, cfg.v0, h) + 0.5 * midpoint_dot(g, g, cfg.A, h) -
         source_integral(cfg.u0, cfg.k, cfg.p, h);
  r.Lambda0 = std::sqrt(std::max(0.0, r.ell) * grad_sq);

  if (!(r.ell > 0.0)) {
    r.B = kInf;
    r.verdict = false;
    return r;
  }
  r.B = r.B_p_bound * std::pow(r.ell, -0.5 * cfg.p);
  if (r.K == 0.0) {
    r.lambda1_infinite = true;
    r.Lambda1 = kInf;
    r.E1 = kInf;
    r.smallness_threshold = kInf;
    r.tilde_C = 0.0;
    r.verdict = true;
    return r;
  }
  r.Lambda1 = std::pow(1.0 / (r.K * r.B), 1.0 / (cfg.p - 2.0));
  r.E1 = (0.5 - 1.0 / cfg.p) * r.Lambda1 * r.Lambda1;
  r.tilde_C = tilde_constant(r.K, r.B, cfg.p, r.Lambda0);
  const double second = std::pow(r.ell / (8.0 * r.K * r.B_p_bound), 2.0 / (cfg.p - 2.0)) * r.ell /
                        (2.0 * (1.0 + r.tilde_C));
  r.smallness_threshold = cfg.gate_relax * std::min(r.E1, second);
  r.verdict = r.E0 < r.E1 && r.Lambda0 < r.Lambda1 && r.E0 < r.smallness_threshold;
  return r;
}

double gate_scale_factor(const ProblemConfig& cfg) {
  auto passes = [&](double s) {
    ProblemConfig scaled = cfg;
    scaled.u0 = s * cfg.u0;
    scaled.v0 = s * cfg.v0;
    return wellposedness_gate(scaled).verdict;
  };
  if (passes(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

nlohmann::json to_json(const WellPosednessReport& r) {
  return {{"ell", r.ell},
          {"B_p_bound", r.B_p_bound},
          {"B", finite_or_null(r.B)},
          {"K", r.K},
          {"p", r.p},
          {"Lambda1", finite_or_null(r.Lambda1)},
          {"Lambda1_infinite", r.lambda1_infinite},
          {"E1", finite_or_null(r.E1)},
          {"E0", r.E0},
          {"Lambda0", r.Lambda0},
          {"smallness_threshold", finite_or_null(r.smallness_threshold)},
          {"tilde_C", finite_or_null(r.tilde_C)},
          {"gate_relax", r.gate_relax},
          {"verdict", r.verdict}};
}

double EnergyTrace::max_abs_residual() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, std::abs(s.dissipation_residual));
  return m;
}

LambdaMonitorReport lambda_monitor(const EnergyTrace& trace) {
  LambdaMonitorReport r;
  r.trivial = trace.gate.lambda1_infinite;
  r.asserted = trace.gate.verdict && !r.trivial;
  for (const auto& s : trace.samples) r.max_Lambda = std::max(r.max_Lambda, s.Lambda);
  if (!r.trivial && trace.gate.Lambda1 > 0.0) r.max_ratio = r.max_Lambda / trace.gate.Lambda1;
  r.pass = !r.asserted || r.max_ratio < 1.0;
  return r;
}

PotentialWellReport potential_well_check(const EnergyTrace& trace, double tolerance) {
  PotentialWellReport r;
  r.asserted = trace.gate.verdict;
  if (trace.samples.empty()) return r;
  const double E0 = trace.samples.front().E;
  r.tolerance = tolerance * std::abs(E0);
  double lambda2 = trace.gate.Lambda0;
  for (const auto& s : trace.samples) lambda2 = std::max(lambda2, s.Lambda);
  r.tilde_C_post = trace.gate.K == 0.0 ? 0.0 : tilde_constant(trace.gate.K, trace.gate.B, trace.p, lambda2);
  const double lower_tol = 1e-10 * std::max(1.0, std::abs(trace.samples.front().bbE));
  for (const auto& s : trace.samples) {
    if (s.bbE < 0.5 * trace.ell * s.grad_sq - lower_tol) ++r.lower_bound_violations;
    if (!r.asserted) continue;
    if (s.source_term > r.tilde_C_post * s.E + r.tolerance) ++r.r1_violations;
    if (s.bbE > (1.0 + r.tilde_C_post) * E0 + r.tolerance) ++r.r2_violations;
    if (!trace.gate.lambda1_infinite && !(s.Lambda < trace.gate.Lambda1)) ++r.lambda_violations;
  }
  return r;
}

std::vector<double> smooth5(const std::vector<double>& values) {
  const long n = static_cast<long>(values.size());
  std::vector<double> out(values.size());
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - 2);
    const long hi = std::min(n - 1, i + 2);
    double sum = 0.0;
    for (long j = lo; j <= hi; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<double> smoothed_energy_rate(const EnergyTrace& trace) {
  const auto& s = trace.samples;
  const long n = static_cast<long>(s.size());
  std::vector<double> energy(s.size());
  for (long i = 0; i < n; ++i) energy[i] = s[i].E;
  const auto smooth = smooth5(energy);
  std::vector<double> rate(s.size(), 0.0);
  if (n < 2) return rate;
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - 1);
    const long hi = std::min(n - 1, i + 1);
    rate[i] = (smooth[hi] - smooth[lo]) / (s[hi].t - s[lo].t);
  }
  return rate;
}

MonotonicityReport monotonicity_check(const EnergyTrace& trace, double relative_tol) {
  MonotonicityReport r;
  const auto& s = trace.samples;
  if (s.size() < 2) return r;
  r.tolerance = relative_tol * std::abs(s.front().E);
  std::vector<double> energy;
  for (const auto& x : s) energy.push_back(x.E);
  const auto smooth = smooth5(energy);
  for (std::size_t i = 1; i < smooth.size(); ++i) {
    const double increase = smooth[i] - smooth[i - 1];
    if (increase > r.max_increase) {
      r.max_increase = increase;
      r.at_time = s[i].t;
    }
    if (increase > r.tolerance) ++r.violations;
  }
  r.pass = r.violations == 0;
  return r;
}

RateBoundReport memory_rate_check(const EnergyTrace& trace, double required_fraction) {
  RateBoundReport r;
  const auto& s = trace.samples;
  if (s.empty()) return r;
  r.tolerance = 2.0 * trace.max_abs_residual() + 1e-6 * std::abs(s.front().E);
  const auto rate = smoothed_energy_rate(trace);
  for (std::size_t i = 0; i < s.size(); ++i) {
    ++r.checked;
    if (s[i].mu <= -2.0 * rate[i] + r.tolerance) ++r.satisfied;
  }
  r.fraction = static_cast<double>(r.satisfied) / r.checked;
  r.pass = r.fraction >= required_fraction;
  return r;
}

JensenReport jensen_bound_check(const EnergyTrace& trace, const ConvexityData& cx, double q,
                                double required_fraction, double relative_slack) {
  JensenReport r;
  for (const auto& s : trace.samples) {
    if (!(s.t > 0.0) || s.psi_integral < 1e-14) {
      ++r.skipped;
      continue;
    }
    const double xi = cx.rate(s.t);
    double bound = 0.0;
    bool saturated = false;
    if (q == 1.0) {
      const double gamma = 1.0 / s.psi_integral;
      bound = shape_inverse(cx, gamma * s.mu / xi, &saturated) / gamma;
    } else {
      const double gamma = s.t / s.psi_integral;
      bound = s.t / gamma * shape_inverse(cx, gamma * s.mu / (s.t * xi), &saturated);
    }
    if (saturated || !std::isfinite(bound)) {
      ++r.saturated;
      continue;
    }
    ++r.checked;
    if (s.f_circ_grad <= bound * (1.0 + relative_slack)) ++r.satisfied;
    if (bound > 0.0) r.max_ratio = std::max(r.max_ratio, s.f_circ_grad / bound);
  }
  r.fraction = r.checked > 0 ? static_cast<double>(r.satisfied) / r.checked : 1.0;
  r.pass = r.fraction >= required_fraction;
  return r;
}

nlohmann::json to_json(const LambdaMonitorReport& r) {
  return {{"asserted", r.asserted}, {"trivial", r.trivial}, {"max_ratio", r.max_ratio},
          {"max_Lambda", r.max_Lambda}, {"pass", r.pass}};
}

nlohmann::json to_json(const PotentialWellReport& r) {
  return {{"asserted", r.asserted},
          {"tilde_C_post", finite_or_null(r.tilde_C_post)},
          {"tolerance", r.tolerance},
          {"lower_bound_violations", r.lower_bound_violations},
          {"r1_violations", r.r1_violations},
          {"r2_violations", r.r2_violations},
          {"lambda_violations", r.lambda_violations},
          {"pass", r.pass()}};
}

nlohmann::json to_json(const MonotonicityReport& r) {
  return {{"tolerance", r.tolerance}, {"max_increase", r.max_increase}, {"at_time", r.at_time},
          {"violations", r.violations}, {"pass", r.pass}};
}

nlohmann::json to_json(const RateBoundReport& r) {
  return {{"tolerance", r.tolerance}, {"checked", r.checked}, {"satisfied", r.satisfied},
          {"fraction", r.fraction}, {"pass", r.pass}};
}

nlohmann::json to_json(const JensenReport& r) {
  return {{"checked", r.checked}, {"satisfied", r.satisfied}, {"skipped", r.skipped},
          {"saturated", r.saturated}, {"fraction", r.fraction}, {"max_ratio", r.max_ratio},
          {"pass", r.pass}};
}

}  // namespace viscowave
