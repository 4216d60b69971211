// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "viscowave/cli.hpp"
#include "viscowave/convexity.hpp"
#include "viscowave/damping.hpp"
#include "viscowave/decay.hpp"
#include "viscowave/energy.hpp"
#include "viscowave/io.hpp"
#include "viscowave/kernel.hpp"
#include "viscowave/presets.hpp"
#include "viscowave/simulation.hpp"
#include "viscowave/solver.hpp"

using namespace viscowave;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!pass) ++failures;
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

struct PresetRun {
  ExamplePreset preset;
  ProblemConfig cfg;
  EnergyTrace trace;
  DecaySeries series;
  DecayFitReport fit;
};

PresetRun run_preset(int id, const json& patch = json::object()) {
  PresetRun r;
  r.preset = example_preset(id);
  r.preset.config.merge_patch(patch);
  r.cfg = problem_from_json(r.preset.config);
  r.trace = run(r.cfg);
  r.series = to_series(r.trace.samples);
  const Kernel kernel(*r.cfg.kernel);
  r.fit = fit_decay(r.series, r.cfg.damping.q, r.preset.tail_fraction);
  add_example_envelopes(r.fit, r.series, id, kernel, r.cfg.damping.q);
  return r;
}

const EnvelopeVerdict* find_verdict(const DecayFitReport& r, const std::string& name) {
  for (const auto& v : r.envelope_verdicts)
    if (v.name == name) return &v;
  return nullptr;
}

const EnvelopeVerdict* find_model(const DecayFitReport& r, EnvelopeModel model) {
  for (const auto& v : r.envelope_verdicts)
    if (v.envelope.model == model) return &v;
  return nullptr;
}

double standing_wave_l2_error(int cells) {
  const json j{{"n_cells", cells},
               {"dt", 0.5 / cells},
               {"t_end", 0.5},
               {"coefficients", {{"A", 1.0}, {"a", 0.0}, {"b", 0.0}, {"k", 0.0}}},
               {"initial", {{"u", {{"preset", "sine"}}}}}};
  const ProblemConfig cfg = problem_from_json(j);
  Solver solver(cfg);
  for (long n = 0; n < cfg.steps(); ++n) solver.step();
  const Vector x = cfg.grid.nodes();
  const Vector err = solver.state().u - ((M_PI * x.array()).sin() * std::cos(M_PI * solver.time())).matrix();
  return std::sqrt(nodal_dot(err, err, cfg.grid.spacing()));
}

void convergence() {
  const auto start = std::chrono::steady_clock::now();
  const double e1 = standing_wave_l2_error(64), e2 = standing_wave_l2_error(128), e3 = standing_wave_l2_error(256);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double o1 = std::log2(e1 / e2), o2 = std::log2(e2 / e3);
  report(o1 >= 1.9 && o2 >= 1.9 && seconds < 30.0, "exact-solution convergence",
         fmt("L2 orders %.3f, %.3f (need >= 1.9), %.2f s (need < 30 s)", o1, o2, seconds));
}

void evaluator_equivalence() {
  json base = example_preset(1).config;
  base["t_end"] = 200.5 * problem_from_json(base).dt;
  json direct = base, prony = base;
  direct["conv_strategy"] = "direct";
  prony["conv_strategy"] = "prony";
  Solver a(problem_from_json(direct)), b(problem_from_json(prony));
  double worst = 0.0, worst_fun = 0.0;
  for (int n = 0; n < 200; ++n) {
    MemoryFunctionals ma, mb;
    a.step([&](const StepView& v) { ma = v.memory; });
    b.step([&](const StepView& v) { mb = v.memory; });
    const Vector& da = a.state().memory_term;
    const Vector& db = b.state().memory_term;
    const double scale = da.cwiseAbs().maxCoeff();
    if (scale > 0.0) worst = std::max(worst, (da - db).cwiseAbs().maxCoeff() / scale);
    if (ma.f_circ > 0.0) worst_fun = std::max(worst_fun, std::abs(ma.f_circ - mb.f_circ) / ma.f_circ);
    if (ma.mu > 0.0) worst_fun = std::max(worst_fun, std::abs(ma.mu - mb.mu) / ma.mu);
  }
  report(worst <= 1e-10, "evaluator equivalence",
         fmt("200 steps, sup relative deviation %.3g in the memory term (need <= 1e-10); f_circ/mu %.3g", worst,
             worst_fun));
}

void monotonicity(const std::vector<const PresetRun*>& runs) {
  bool pass = true;
  std::string detail;
  for (const PresetRun* r : runs) {
    const MonotonicityReport m = monotonicity_check(r->trace);
    pass = pass && m.pass && !r->trace.blow_up;
    detail += "preset " + std::to_string(r->preset.id) + fmt(" max rise %.3g (tol %.3g); ", m.max_increase, m.tolerance);
  }
  report(pass, "energy monotonicity", detail);
}

void dissipation_refinement(const PresetRun& fine_preset) {
  const PresetRun coarse = run_preset(1, json{{"n_cells", 200}});
  const double rc = coarse.trace.max_abs_residual();
  const double rf = fine_preset.trace.max_abs_residual();
  report(rc / rf >= 1.8, "dissipation identity refinement",
         fmt("max |residual| %.3g (200 cells) -> %.3g (400 cells), factor %.2f (need >= 1.8)", rc, rf, rc / rf));
}

void potential_well(const std::vector<const PresetRun*>& runs) {
  bool pass = true;
  std::string detail;
  for (const PresetRun* r : runs) {
    const PotentialWellReport p = potential_well_check(r->trace);
    const bool gated = r->trace.gate.verdict;
    pass = pass && gated && p.pass();
    detail += "preset " + std::to_string(r->preset.id) + (gated ? " gate ok" : " gate FAILED") +
              fmt(", violations lower %g r1 %g r2 %g Lambda %g; ", p.lower_bound_violations, p.r1_violations,
                  p.r2_violations, p.lambda_violations);
  }
  report(pass, "potential-well bounds", detail);
}

void polynomial_bound_q2() {
  const PresetRun r = run_preset(1, json{{"damping", {{"q", 2.0}}}});
  const EnvelopeVerdict* v = find_verdict(r.fit, "baseline-polynomial");
  const IntegralCheck& ic = r.fit.integral_check;
  const bool pass = v && v->checked > 0 && v->sup_ratio <= 1.05 && ic.decreasing && ic.increment_late < ic.increment_early;
  report(pass, "polynomial bound direction (q = 2)",
         fmt("sup E (1+t)^{2/3} / C_fit = %.4f (need <= 1.05); E^{3/2} increments %.3g -> %.3g", v ? v->sup_ratio : NAN,
             ic.increment_early, ic.increment_late));
}

void exponential_case(const PresetRun& r) {
  const EnvelopeVerdict* v = find_verdict(r.fit, "exponential");
  const bool pass = r.fit.selected_model == "exponential" && r.fit.exp_fit.r2 > r.fit.poly_fit.r2 &&
                    r.fit.exp_fit.c2 > 0.0 && v && v->pass;
  report(pass, "exponential decay (shifted-exponential kernel, q = 1)",
         "selected " + r.fit.selected_model +
             fmt(", R2 exp %.6f vs poly %.6f, c2 %.4f, envelope sup %.4f (need <= 1.05)", r.fit.exp_fit.r2,
                 r.fit.poly_fit.r2, r.fit.exp_fit.c2, v ? v->sup_ratio : NAN));
}

void stretched_case(const PresetRun& r) {
  const double alpha = 0.2, beta = 0.5;
  const auto cx = stretched_convexity(alpha, beta);
  double worst = -INFINITY;
  for (int i = 0; i < 100; ++i) {
    const double t = alpha * std::pow(10.0, -12.0 + 12.0 * i / 100.0);
    worst = std::max(worst, g1_map(cx, t) - std::pow(std::log(alpha / t), 1.0 / beta));
  }
  const EnvelopeVerdict* v = find_model(r.fit, EnvelopeModel::stretched_exponential);
  const bool pass = worst <= 1e-9 && v && v->pass;
  report(pass, "stretched-exponential decay (q = 1)",
         fmt("max G1(t) - (ln(alpha/t))^{1/beta} = %.3g over 100 points (need <= 1e-9); envelope sup %.4f (need <= 1.05)",
             worst, v ? v->sup_ratio : NAN));
}

void power_case(const PresetRun& r) {
  const EnvelopeVerdict* v = find_verdict(r.fit, "baseline-polynomial");
  const bool pass = r.fit.selected_model == "polynomial" && v && v->pass && r.fit.poly_fit.alpha >= 0.6;
  report(pass, "polynomial decay (power-law kernel, q = 2)",
         "selected " + r.fit.selected_model +
             fmt(", R2 poly %.6f vs exp %.6f, alpha %.3f (need >= 0.6), 2/3 envelope sup %.4f", r.fit.poly_fit.r2,
                 r.fit.exp_fit.r2, r.fit.poly_fit.alpha, v ? v->sup_ratio : NAN));
}

void kernel_toolkit() {
  const Kernel shifted(KernelSpec{KernelFamily::shifted_exponential, 0.1, 1.0, {}});
  const Kernel stretched(KernelSpec{KernelFamily::stretched_exponential, 0.2, 0.5, {}});
  const Kernel power(KernelSpec{KernelFamily::power_law, 0.05, 2.0, {}});
  const double f0 = kernel_value(shifted, 0.0);
  double worst = 0.0;
  for (double delta : {0.1, 0.01})
    worst = std::max(worst, std::abs(damped_mass(shifted, delta) / (f0 / (1.0 + delta)) - 1.0));
  bool decreasing = true;
  for (const Kernel* k : {&shifted, &stretched, &power}) {
    double previous = INFINITY;
    for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const double value = delta * damped_mass(*k, delta);
      if (!(value < previous)) decreasing = false;
      previous = value;
    }
  }
  report(worst <= 1e-8 && decreasing, "kernel toolkit",
         fmt("M(delta) relative error %.3g (need <= 1e-8); delta M(delta) strictly decreasing: ", worst) +
             (decreasing ? "yes" : "no"));
}

void memory_diagnostics(const PresetRun& r) {
  const RateBoundReport rate = memory_rate_check(r.trace);
  const auto cx = default_convexity(Kernel(*r.cfg.kernel));
  const JensenReport jensen = jensen_bound_check(r.trace, *cx, r.cfg.damping.q);
  report(rate.pass && jensen.pass, "memory-rate and Jensen diagnostics",
         fmt("rate bound at %.2f%% of %g steps, Jensen at %.2f%% of %g steps (need >= 99%%)", 100.0 * rate.fraction,
             rate.checked, 100.0 * jensen.fraction, jensen.checked));
}

void damping_solver() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> qd(1.0, 5.0), sd(0.1, 10.0), cd(0.0, 100.0), rd(-100.0, 100.0);
  double worst = 0.0;
  bool monotone = true;
  for (int i = 0; i < 10000; ++i) {
    const DampingSpec d{qd(rng), sd(rng)};
    const double c = cd(rng), r = rd(rng), dr = std::abs(rd(rng)) * 1e-3 + 1e-9;
    const double v = solve_damping_pointwise(r, c, d);
    worst = std::max(worst, std::abs(v + c * d(v) - r) / (1.0 + std::abs(r)));
    if (!(solve_damping_pointwise(r + dr, c, d) >= v)) monotone = false;
  }
  report(worst <= 1e-12 && monotone, "damping solver",
         fmt("10^4 instances, max scaled residual %.3g (need <= 1e-12), monotone in r: ", worst) +
             (monotone ? "yes" : "no"));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const fs::path dir = fs::temp_directory_path() / "viscowave-acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_json_file(dir / "config.json", example_preset(1).config);
  std::ostringstream sink;
  int codes = 0;
  for (const char* out : {"a", "b"}) {
    const std::string cfg = (dir / "config.json").string(), target = (dir / out).string();
    const char* argv[] = {"viscowave", "run", "--config", cfg.c_str(), "--out", target.c_str()};
    codes += run_cli(6, argv, sink, sink);
  }
  const std::string a = slurp(dir / "a" / "trace.csv"), b = slurp(dir / "b" / "trace.csv");
  report(codes == 0 && !a.empty() && a == b, "determinism",
         fmt("two runs of one config, trace.csv %.0f and %.0f bytes, identical: ", a.size(), b.size()) +
             (a == b ? "yes" : "no"));
  fs::remove_all(dir);
}

}  // namespace

int main() {
  convergence();
  evaluator_equivalence();
  const PresetRun ex1 = run_preset(1);
  const PresetRun ex2 = run_preset(2);
  const PresetRun ex3 = run_preset(3);
  monotonicity({&ex1, &ex2, &ex3});
  dissipation_refinement(ex1);
  potential_well({&ex1, &ex2, &ex3});
  polynomial_bound_q2();
  exponential_case(ex1);
  stretched_case(ex2);
  power_case(ex3);
  kernel_toolkit();
  memory_diagnostics(ex1);
  damping_solver();
  determinism();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
