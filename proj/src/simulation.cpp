#include "viscowave/simulation.hpp"

#include <map>

#include "viscowave/errors.hpp"
#include "viscowave/solver.hpp"

namespace viscowave {

EnergyTrace run(const ProblemConfig& cfg) {
  EnergyTrace trace;
  trace.dt = cfg.dt;
  trace.record_stride = cfg.record_stride;
  trace.q = cfg.damping.q;
  trace.p = cfg.p;
  trace.gate = wellposedness_gate(cfg);
  trace.ell = trace.gate.ell;

  Solver solver(cfg);
  const EnergyContext ctx = make_energy_context(cfg, solver.kernel());
  const long last_record = cfg.steps();
  const long stride = cfg.record_stride;
  auto needed = [&](long n) {
    if (n <= 2) return true;
    const long r = n % stride;
    return r == 0 || r == 1 || r == stride - 1;
  };

  std::map<long, EnergyCore> cores;
  long next_record = 0;
  auto emit_ready = [&]() {
    while (next_record <= last_record && cores.count(next_record + 1) && cores.count(2)) {
      const long n = next_record;
      double residual = 0.0;
      if (n == 0) residual = dissipation_residual_start(cores.at(0), cores.at(1), cores.at(2), cfg.dt);
      else residual = dissipation_residual(cores.at(n - 1), cores.at(n), cores.at(n + 1), cfg.dt);
      trace.samples.push_back(make_sample(cores.at(n), residual));
      next_record += stride;
      while (!cores.empty() && cores.begin()->first < next_record - 1 && cores.begin()->first > 2)
        cores.erase(cores.begin());
    }
  };

  try {
    for (long n = 0; n <= std::max(last_record + 1, 2L); ++n) {
      solver.step([&](const StepView& view) {
        if (needed(view.n)) cores.emplace(view.n, energy_core(view, cfg, ctx));
      });
      emit_ready();
    }
  } catch (const BlowUpError& e) {
    trace.blow_up = true;
    trace.blow_up_step = e.step();
  }
  return trace;
}

}  // namespace viscowave
