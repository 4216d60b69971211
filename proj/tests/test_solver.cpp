#include <doctest.h>

#include <cmath>
#include <random>

#include "viscowave/convolution.hpp"
#include "viscowave/damping.hpp"
#include "viscowave/errors.hpp"
#include "viscowave/grid.hpp"
#include "viscowave/problem.hpp"
#include "viscowave/solver.hpp"

using namespace viscowave;
using nlohmann::json;

namespace {

json wave_config(int cells, double t_end) {
  return json{{"n_cells", cells},
              {"dt", 0.5 / cells},
              {"t_end", t_end},
              {"coefficients", {{"A", 1.0}, {"a", 0.0}, {"b", 0.0}, {"k", 0.0}}},
              {"initial", {{"u", {{"preset", "sine"}}}}}};
}

double standing_wave_error(int cells) {
  const ProblemConfig cfg = problem_from_json(wave_config(cells, 0.5));
  Solver solver(cfg);
  for (long n = 0; n < cfg.steps(); ++n) solver.step();
  const Vector x = cfg.grid.nodes();
  const Vector exact = ((M_PI * x.array()).sin() * std::cos(M_PI * solver.time())).matrix();
  return (solver.state().u - exact).cwiseAbs().maxCoeff();
}

Vector random_gradient(std::mt19937_64& rng, int cells) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector g(cells);
  for (int i = 0; i < cells; ++i) g(i) = n(rng);
  return g;
}

}  // namespace

TEST_CASE("flux-form stencil") {
  double previous = 0.0;
  for (int cells : {32, 64, 128, 256}) {
    const Grid grid{1.0, cells};
    const double h = grid.spacing();
    const Vector x = grid.nodes();
    const Vector u = (M_PI * x.array()).sin().matrix();
    const Vector c = Vector::Ones(cells);
    const Vector lap = apply_div_grad(u, c, h);
    double err = 0.0;
    for (int i = 1; i < cells; ++i) err = std::max(err, std::abs(lap(i) + M_PI * M_PI * u(i)));
    CHECK(lap(0) == 0.0);
    CHECK(lap(cells) == 0.0);
    if (previous > 0.0) CHECK(std::log2(previous / err) >= 1.95);
    previous = err;
  }

  const Vector zero = Vector::Zero(17);
  CHECK(apply_div_grad(zero, Vector::Ones(16), 1.0 / 16).cwiseAbs().maxCoeff() == 0.0);

  // hand stencil: u = (0, 1, 3, 0), c = (1, 2, 3), h = 1
  Vector u(4);
  u << 0.0, 1.0, 3.0, 0.0;
  Vector c(3);
  c << 1.0, 2.0, 3.0;
  const Vector out = apply_div_grad(u, c, 1.0);
  CHECK(out(1) == doctest::Approx(2.0 * 2.0 - 1.0 * 1.0));
  CHECK(out(2) == doctest::Approx(3.0 * -3.0 - 2.0 * 2.0));
}

TEST_CASE("history integral by hand") {
  // f(t) = e * exp(-(t+1)) = exp(-t); one gradient g^0 = 1, then g^1 = 1
  const Kernel kernel(KernelSpec{KernelFamily::shifted_exponential, std::exp(1.0), 1.0, {}});
  const Vector a = Vector::Ones(1);
  DirectConvolution direct(kernel, a, 1.0, 0.1, 10);
  PronyConvolution prony(prony_modes(kernel), a, 1.0, 0.1);
  const Vector g = Vector::Ones(1);
  direct.push(g);
  prony.push(g);
  CHECK(direct.current_step() == 0);
  CHECK(direct.history_flux()(0) == 0.0);
  direct.push(g);
  prony.push(g);
  const double expected = 0.05 * (std::exp(-0.1) + 1.0);
  CHECK(direct.history_flux()(0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(std::abs(prony.history_flux()(0) - expected) <= 1e-12);
  // constant gradient: every history functional vanishes
  CHECK(direct.functionals().f_circ == 0.0);
  CHECK(direct.functionals().mu == 0.0);
  CHECK(prony.functionals().psi_integral == doctest::Approx(0.0));

  // f_circ with g^0 = 0, g^1 = 1: w_0 f(dt) |1|^2
  DirectConvolution d2(kernel, a, 1.0, 0.1, 10);
  d2.push(Vector::Zero(1));
  d2.push(g);
  CHECK(d2.functionals().f_circ == doctest::Approx(0.05 * std::exp(-0.1)).epsilon(1e-14));
  CHECK(d2.functionals().mu == doctest::Approx(0.05 * std::exp(-0.1)).epsilon(1e-14));
  CHECK(d2.functionals().psi_integral == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("direct and recursive evaluators agree") {
  const Kernel kernel(KernelSpec{KernelFamily::shifted_exponential, 0.1, 1.0, {}});
  const int cells = 20;
  const double h = 1.0 / cells, dt = 0.01;
  Vector a(cells);
  for (int i = 0; i < cells; ++i) a(i) = 1.0 + 0.5 * std::sin(i);
  DirectConvolution direct(kernel, a, h, dt, 300);
  PronyConvolution prony(prony_modes(kernel), a, h, dt);
  std::mt19937_64 rng(11);
  double worst = 0.0, worst_fun = 0.0;
  for (int n = 0; n < 200; ++n) {
    const Vector g = random_gradient(rng, cells);
    direct.push(g);
    prony.push(g);
    const Vector d = direct.history_flux();
    const Vector p = prony.history_flux();
    worst = std::max(worst, (d - p).cwiseAbs().maxCoeff() / std::max(1e-300, d.cwiseAbs().maxCoeff()));
    const auto fd = direct.functionals(), fp = prony.functionals();
    worst_fun = std::max({worst_fun, std::abs(fd.f_circ - fp.f_circ) / std::max(1e-300, fd.f_circ),
                          std::abs(fd.mu - fp.mu) / std::max(1e-300, fd.mu),
                          std::abs(fd.psi_integral - fp.psi_integral) / std::max(1e-300, fd.psi_integral)});
  }
  CHECK(worst <= 1e-10);
  CHECK(worst_fun <= 1e-10);

  const Kernel other(KernelSpec{KernelFamily::power_law, 0.05, 2.0, {}});
  CHECK_THROWS_AS(prony_modes(other), UnsupportedStrategyError);
}

TEST_CASE("no kernel means no memory") {
  const ProblemConfig cfg = problem_from_json(json{{"n_cells", 32}, {"t_end", 0.5}, {"initial", {{"u", {{"preset", "sine"}}}}}});
  CHECK(make_convolution(cfg, nullptr) == nullptr);
  Solver solver(cfg);
  for (long n = 0; n < cfg.steps(); ++n) {
    solver.step([](const StepView& view) {
      CHECK(view.memory.f_circ == 0.0);
      CHECK(view.memory.mu == 0.0);
    });
    CHECK(solver.state().memory_term.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("pointwise damping solve") {
  const DampingSpec linear{1.0, 1.0};
  CHECK(solve_damping_pointwise(0.0, 1.0, linear) == 0.0);
  CHECK(solve_damping_pointwise(3.0, 0.0, linear) == 3.0);
  CHECK(solve_damping_pointwise(2.0, 1.0, linear) == doctest::Approx(1.0));
  const DampingSpec quad{2.0, 1.0};
  // |v| <= 1 branch: v + v|v| = 1.5
  CHECK(solve_damping_pointwise(1.5, 1.0, quad) == doctest::Approx((-1.0 + std::sqrt(7.0)) / 2.0).epsilon(1e-14));
  CHECK(solve_damping_pointwise(-1.5, 1.0, quad) == doctest::Approx((1.0 - std::sqrt(7.0)) / 2.0).epsilon(1e-14));
  // |v| > 1 branch: v + 0.5 v = 6
  CHECK(solve_damping_pointwise(6.0, 0.5, quad) == doctest::Approx(4.0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> qd(1.0, 4.0), cd(0.0, 10.0), rd(-50.0, 50.0);
  bool residual_ok = true, monotone_ok = true;
  for (int i = 0; i < 10000; ++i) {
    const DampingSpec d{qd(rng), 1.0};
    const double c = cd(rng), r = rd(rng);
    const double v = solve_damping_pointwise(r, c, d);
    if (std::abs(v + c * d(v) - r) > 1e-12 * (1.0 + std::abs(r))) residual_ok = false;
    const double v2 = solve_damping_pointwise(r + 0.1, c, d);
    if (!(v2 >= v)) monotone_ok = false;
  }
  CHECK(residual_ok);
  CHECK(monotone_ok);
}

TEST_CASE("second-order convergence on a standing wave") {
  const double e1 = standing_wave_error(32);
  const double e2 = standing_wave_error(64);
  const double e3 = standing_wave_error(128);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(std::log2(e2 / e3) >= 1.9);
  CHECK(std::log2(e2 / e3) <= 2.1);
}

TEST_CASE("zero data stays zero") {
  const json j{{"n_cells", 32},
               {"t_end", 2.0},
               {"coefficients", {{"k", 0.5}}},
               {"kernel", {{"family", "power-law"}, {"alpha", 0.05}, {"beta", 2.0}}}};
  const ProblemConfig cfg = problem_from_json(j);
  Solver solver(cfg);
  for (long n = 0; n < cfg.steps(); ++n) solver.step();
  CHECK(solver.state().u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(solver.state().v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("large data with strong source blows up") {
  const json j{{"n_cells", 32},
               {"t_end", 50.0},
               {"p", 4.0},
               {"coefficients", {{"k", 1.0}, {"b", 0.1}}},
               {"initial", {{"u", {{"preset", "sine"}, {"amplitude", 50.0}}}}}};
  const ProblemConfig cfg = problem_from_json(j);
  Solver solver(cfg);
  long reached = -1;
  try {
    for (long n = 0; n < cfg.steps(); ++n) solver.step();
  } catch (const BlowUpError& e) {
    reached = e.step();
  }
  CHECK(reached > 0);
}

TEST_CASE("time step restriction") {
  json j{{"n_cells", 100}, {"t_end", 1.0}};
  ProblemConfig cfg = problem_from_json(j);
  CHECK(cfg.dt == doctest::Approx(0.009));
  CHECK(cfl_check(cfg).pass);
  j["coefficients"] = {{"A", 4.0}};
  cfg = problem_from_json(j);
  CHECK(cfl_check(cfg).max_dt == doctest::Approx(0.0045));
  j["dt"] = 0.005;
  cfg = problem_from_json(j);
  const CflReport report = cfl_check(cfg);
  CHECK_FALSE(report.pass);
  CHECK_FALSE(report.message.empty());
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(problem_from_json(json::array()), ConfigError);
  CHECK_THROWS_AS(problem_from_json(json{{"t_end", 1.0}}), ConfigError);
  CHECK_THROWS_AS(problem_from_json(json{{"n_cells", 8}, {"t_end", 1.0}}), ConfigError);
  CHECK_THROWS_AS(problem_from_json(json{{"n_cells", 32}, {"t_end", "x"}}), ConfigError);
  CHECK_THROWS_AS(problem_from_json(json{{"n_cells", 32}, {"t_end", 1.0}, {"conv_strategy", "fft"}}), ConfigError);
  CHECK_THROWS_AS(problem_from_json(json{{"n_cells", 32}, {"t_end", 1.0}, {"coefficients", {{"A", {1.0, 2.0}}}}}),
                  ConfigError);
  try {
    problem_from_json(json{{"n_cells", 32}, {"t_end", 1.0}, {"coefficients", {{"b", {{"preset", "wavy"}}}}}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("coefficients.b") != std::string::npos);
  }

  const ProblemConfig ok = problem_from_json(
      json{{"n_cells", 32}, {"t_end", 1.0}, {"kernel", {{"family", "shifted-exponential"}, {"alpha", 0.1}, {"beta", 1.0}}}});
  CHECK(validate_assumptions(ok).empty());
  const ProblemConfig bad = problem_from_json(json{{"n_cells", 32}, {"t_end", 1.0}, {"p", 2.0}, {"coefficients", {{"b", -1.0}}}});
  CHECK(validate_assumptions(bad).size() >= 2);

  // prony strategy is refused for kernels that are not one exponential
  const ProblemConfig pl = problem_from_json(json{{"n_cells", 32},
                                                  {"t_end", 1.0},
                                                  {"conv_strategy", "prony"},
                                                  {"kernel", {{"family", "power-law"}, {"alpha", 0.05}, {"beta", 2.0}}}});
  CHECK_THROWS_AS(Solver{pl}, UnsupportedStrategyError);
}
