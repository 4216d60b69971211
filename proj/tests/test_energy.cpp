#include <doctest.h>

#include <cmath>
#include <random>

#include "viscowave/energy.hpp"
#include "viscowave/errors.hpp"
#include "viscowave/simulation.hpp"

using namespace viscowave;
using nlohmann::json;

namespace {

json damped_config(int cells, double t_end, int stride) {
  return json{{"n_cells", cells},
              {"t_end", t_end},
              {"record_stride", stride},
              {"coefficients", {{"A", 1.0}, {"a", 1.0}, {"b", 1.0}, {"k", 0.01}}},
              {"kernel", {{"family", "shifted-exponential"}, {"alpha", 0.1}, {"beta", 1.0}}},
              {"conv_strategy", "prony"},
              {"initial", {{"u", {{"preset", "sine"}}}}}};
}

EnergyCore core_of(const ProblemConfig& cfg, const Vector& u, const Vector& v) {
  const Vector grad = gradient(u, cfg.grid.spacing());
  const Vector force = Vector::Zero(u.size());
  const StepView view{0, 0.0, u, v, grad, force, MemoryFunctionals{}};
  const EnergyContext ctx = make_energy_context(cfg, nullptr);
  return energy_core(view, cfg, ctx);
}

}  // namespace

TEST_CASE("energy of simple states") {
  const ProblemConfig cfg = problem_from_json(json{{"n_cells", 200}, {"t_end", 1.0}, {"coefficients", {{"k", 0.5}}}});
  const Vector zero = Vector::Zero(201);
  const EnergyCore z = core_of(cfg, zero, zero);
  CHECK(z.E == 0.0);
  CHECK(z.bbE == 0.0);
  CHECK(z.Lambda == 0.0);

  const Vector x = cfg.grid.nodes();
  const Vector u = (M_PI * x.array()).sin().matrix();
  const EnergyCore s = core_of(cfg, u, zero);
  CHECK(s.F3 == 0.0);
  CHECK(s.l2_ut == 0.0);
  // 0.5 ||u_x||^2 - (k/p) int |u|^3 for u = sin(pi x)
  const double source = 0.5 / 3.0 * 4.0 / (3.0 * M_PI);
  CHECK(s.source_term == doctest::Approx(source).epsilon(1e-4));
  CHECK(s.E == doctest::Approx(M_PI * M_PI / 4.0 - source).epsilon(1e-4));
  CHECK(s.bbE == doctest::Approx(s.E + s.source_term).epsilon(1e-15));
  CHECK(s.Lambda == doctest::Approx(std::sqrt(s.grad_sq)).epsilon(1e-15));
}

TEST_CASE("conservative standing wave keeps its energy") {
  const json j{{"n_cells", 100},
               {"t_end", 4.0},
               {"coefficients", {{"A", 1.0}, {"a", 0.0}, {"b", 0.0}, {"k", 0.0}}},
               {"initial", {{"u", {{"preset", "sine"}}}}}};
  const EnergyTrace trace = run(problem_from_json(j));
  REQUIRE(trace.samples.size() > 10);
  for (const auto& s : trace.samples) {
    CHECK(s.E == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-3));
    CHECK(s.bbE == s.E);
  }
  CHECK(trace.max_abs_residual() <= 1e-3 * trace.samples.front().E);
}

TEST_CASE("Sobolev constant bound") {
  CHECK(sobolev_bound(1.0, 2.0) == doctest::Approx(0.5));
  CHECK(sobolev_bound(1.0, 3.0) == doctest::Approx(0.3535534).epsilon(1e-7));
  for (double r : {2.0, 3.0, 5.0}) CHECK(sobolev_bound(2.0, r) / sobolev_bound(1.0, r) == doctest::Approx(std::pow(2.0, 1.0 + r / 2.0)));
  CHECK_THROWS_AS(sobolev_bound(1.0, 1.5), DomainError);

  // int |w|^r <= bound * ||w'||^r on random sine polynomials
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  const int points = 2000;
  for (int trial = 0; trial < 50; ++trial) {
    double c[5];
    for (double& ci : c) ci = n(rng);
    const double r = 2.0 + trial % 4;
    double lhs = 0.0, grad = 0.0;
    for (int i = 0; i < points; ++i) {
      const double x = (i + 0.5) / points;
      double w = 0.0, dw = 0.0;
      for (int m = 0; m < 5; ++m) {
        w += c[m] * std::sin((m + 1) * M_PI * x);
        dw += c[m] * (m + 1) * M_PI * std::cos((m + 1) * M_PI * x);
      }
      lhs += std::pow(std::abs(w), r) / points;
      grad += dw * dw / points;
    }
    CHECK(lhs <= sobolev_bound(1.0, r) * std::pow(grad, r / 2.0));
  }
}

TEST_CASE("gate arithmetic") {
  CHECK(tilde_constant(1.0, 1.0, 3.0, 0.5) == doctest::Approx(0.5));
  CHECK(std::isinf(tilde_constant(1.0, 1.0, 3.0, 2.0)));

  const ProblemConfig cfg = problem_from_json(damped_config(100, 1.0, 1));
  const WellPosednessReport r = wellposedness_gate(cfg);
  CHECK(r.B_p_bound == doctest::Approx(sobolev_bound(1.0, 3.0)));
  CHECK(r.B == doctest::Approx(r.B_p_bound * std::pow(r.ell, -1.5)));
  CHECK(r.K == doctest::Approx(0.01));
  CHECK(r.Lambda1 == doctest::Approx(1.0 / (r.K * r.B)));
  CHECK(r.E1 == doctest::Approx((0.5 - 1.0 / 3.0) * r.Lambda1 * r.Lambda1));
  CHECK(r.verdict);
  CHECK(gate_scale_factor(cfg) == 1.0);

  // K B = 1 with p = 3: Lambda1 = 1 and E1 = 1/6
  json j = damped_config(100, 1.0, 1);
  const double ell = r.ell;
  j["coefficients"]["k"] = std::pow(ell, 1.5) / r.B_p_bound;
  const WellPosednessReport unit = wellposedness_gate(problem_from_json(j));
  CHECK(unit.Lambda1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(unit.E1 == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK_FALSE(unit.verdict);
  const double s = gate_scale_factor(problem_from_json(j));
  CHECK(s > 0.0);
  CHECK(s < 1.0);

  j["coefficients"]["k"] = 0.0;
  const WellPosednessReport free = wellposedness_gate(problem_from_json(j));
  CHECK(free.lambda1_infinite);
  CHECK(std::isinf(free.Lambda1));
  CHECK(free.verdict);
  CHECK(to_json(free)["Lambda1"].is_null());
}

TEST_CASE("history functionals along a run") {
  const EnergyTrace trace = run(problem_from_json(damped_config(50, 5.0, 1)));
  for (const auto& s : trace.samples) {
    CHECK(s.mu >= 0.0);
    CHECK(s.f_circ_grad >= 0.0);
    CHECK(s.psi_integral >= 0.0);
  }
  CHECK(trace.samples.front().f_circ_grad == 0.0);
}

TEST_CASE("recording stride does not change the recorded values") {
  const EnergyTrace every = run(problem_from_json(damped_config(50, 3.0, 1)));
  const EnergyTrace fifth = run(problem_from_json(damped_config(50, 3.0, 5)));
  REQUIRE(fifth.samples.size() > 5);
  for (std::size_t i = 0; i < fifth.samples.size(); ++i) {
    const auto& a = fifth.samples[i];
    const auto& b = every.samples[5 * i];
    CHECK(a.t == b.t);
    CHECK(a.E == b.E);
    CHECK(a.bbE == b.bbE);
    CHECK(a.mu == b.mu);
    CHECK(a.dissipation_residual == b.dissipation_residual);
  }
}

TEST_CASE("dissipation residual shrinks under refinement") {
  const double coarse = run(problem_from_json(damped_config(50, 5.0, 1))).max_abs_residual();
  const double fine = run(problem_from_json(damped_config(100, 5.0, 2))).max_abs_residual();
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("energy checks on a damped run") {
  const EnergyTrace trace = run(problem_from_json(damped_config(50, 20.0, 1)));
  CHECK(monotonicity_check(trace).pass);
  CHECK(potential_well_check(trace).pass());
  CHECK(lambda_monitor(trace).pass);
  CHECK(memory_rate_check(trace).pass);
  const auto cx = linear_convexity(1.0, 0.1 * std::exp(-1.0));
  const JensenReport jensen = jensen_bound_check(trace, cx, 1.0);
  CHECK(jensen.pass);
  CHECK(jensen.checked > 0);

  const std::vector<double> sm = smooth5({1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
  CHECK(sm[0] == doctest::Approx(2.0));
  CHECK(sm[2] == doctest::Approx(3.0));
  CHECK(sm[5] == doctest::Approx(5.0));
}
