#include "viscowave/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "viscowave/decay.hpp"
#include "viscowave/energy.hpp"
#include "viscowave/errors.hpp"
#include "viscowave/io.hpp"
#include "viscowave/presets.hpp"
#include "viscowave/simulation.hpp"

namespace viscowave {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::optional<double> q, p, dt, t_end;
  std::optional<int> cells, record_stride;
  std::optional<std::string> strategy;
};

void add_override_flags(CLI::App* app, Overrides& o) {
  app->add_option("--q", o.q, "damping exponent q >= 1");
  app->add_option("--p", o.p, "source exponent p > 2");
  app->add_option("--dt", o.dt, "time step");
  app->add_option("--cells", o.cells, "number of grid cells");
  app->add_option("--t-end", o.t_end, "final time");
  app->add_option("--strategy", o.strategy, "memory evaluator")->check(CLI::IsMember({"direct", "prony"}));
  app->add_option("--record-stride", o.record_stride, "record every N steps")->check(CLI::PositiveNumber);
}

void apply_overrides(json& cfg, const Overrides& o) {
  if (o.q) cfg["damping"]["q"] = *o.q;
  if (o.p) cfg["p"] = *o.p;
  if (o.dt) cfg["dt"] = *o.dt;
  if (o.t_end) cfg["t_end"] = *o.t_end;
  if (o.cells) cfg["n_cells"] = *o.cells;
  if (o.record_stride) cfg["record_stride"] = *o.record_stride;
  if (o.strategy) cfg["conv_strategy"] = *o.strategy;
}

std::vector<double> a5_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back(std::pow(10.0, -6.0 + 7.0 * i / 999.0));
  for (int i = 1; i <= 1000; ++i) grid.push_back(10.0 + 40.0 * i / 1000.0);
  return grid;
}

json kernel_report(const Kernel& kernel, double a_sup, double lambda0) {
  json j = to_json(analyze_kernel(kernel, a_sup, lambda0));
  j["kernel"] = to_json(kernel.spec());
  j["A4"] = {{"ell_positive", j["ell"].get<double>() > 0.0}};
  if (const auto cx = default_convexity(kernel)) {
    const ConvexityCheck check = check_convexity_condition(kernel, *cx, a5_grid());
    const ShapeValidation shape = validate_shape(*cx);
    j["A5"] = {{"convexity", cx->label},
               {"max_violation", check.max_violation},
               {"at_time", check.at_time},
               {"points", check.points},
               {"shape_increasing", shape.increasing},
               {"shape_convex", shape.convex},
               {"extension_c2", shape.extension_c2},
               {"pass", check.pass && shape.ok()}};
  } else {
    j["A5"] = nullptr;
  }
  return j;
}

void print_kernel_report(std::ostream& out, const json& j) {
  out << "kernel      " << j["kernel"].dump() << "\n";
  out << "f(0)        " << format_double(j["f0"].get<double>()) << "\n";
  out << "int f       " << format_double(j["total_mass"].get<double>()) << "\n";
  out << "ell         " << format_double(j["ell"].get<double>()) << "  (lambda0="
      << j["lambda0"].get<double>() << ", a_sup=" << j["a_sup"].get<double>() << ")\n";
  out << "M(delta):\n";
  for (const auto& row : j["M_table"])
    out << "  delta=" << std::setw(8) << row["delta"].get<double>() << "  M=" << format_double(row["M"].get<double>())
        << "  delta*M=" << format_double(row["delta_M"].get<double>()) << "\n";
  out << "A4          " << (j["A4"]["ell_positive"].get<bool>() ? "pass" : "FAIL") << "\n";
  if (j["A5"].is_null()) {
    out << "A5          not checked (no default convexity pair)\n";
  } else {
    out << "A5          " << (j["A5"]["pass"].get<bool>() ? "pass" : "FAIL") << " with " << j["A5"]["convexity"]
        << ", max violation " << format_double(j["A5"]["max_violation"].get<double>()) << "\n";
  }
}

void print_decay_report(std::ostream& out, const DecayFitReport& r) {
  out << "tail window from t=" << r.tail_start << "\n";
  out << "exponential  c1=" << r.exp_fit.c1 << " c2=" << r.exp_fit.c2 << " R2=" << r.exp_fit.r2 << "\n";
  out << "polynomial   c=" << r.poly_fit.c << " alpha=" << r.poly_fit.alpha << " R2=" << r.poly_fit.r2 << "\n";
  if (r.stretched_fit)
    out << "stretched    c=" << r.stretched_fit->c << " rate=" << r.stretched_fit->rate
        << " beta=" << r.stretched_fit->beta << " R2=" << r.stretched_fit->r2 << "\n";
  out << "selected     " << r.selected_model << "\n";
  out << "integral check: increments " << r.integral_check.increment_early << " -> "
      << r.integral_check.increment_late << " (ratio " << r.integral_check.ratio << ")\n";
  out << std::left << std::setw(24) << "envelope" << std::setw(14) << "sup ratio" << std::setw(10) << "checked"
      << std::setw(10) << "role" << "verdict\n";
  for (const auto& v : r.envelope_verdicts) {
    out << std::left << std::setw(24) << v.name << std::setw(14) << v.sup_ratio << std::setw(10) << v.checked
        << std::setw(10) << (v.required ? "required" : "info")
        << (v.checked == 0 ? "n/a" : v.pass ? "pass" : "FAIL") << "\n";
  }
  out << std::right;
}

using PostRun = std::function<int(const fs::path&, const ProblemConfig&, const EnergyTrace&)>;

// Validates, runs and writes one configuration into `out_dir`.
int execute_run(const json& input, const fs::path& out_dir, const json& manifest, bool force, std::ostream& out,
                std::ostream& err, const PostRun& post = {}) {
  ProblemConfig cfg;
  try {
    cfg = problem_from_json(input);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const CflReport cfl = cfl_check(cfg);
  if (!cfl.pass) {
    err << "error: " << cfl.message << "\n";
    return 1;
  }
  const auto issues = validate_assumptions(cfg);
  if (!issues.empty()) {
    err << (force ? "warning" : "error") << ": assumption check failed:\n";
    for (const auto& issue : issues) err << "  - " << issue << "\n";
    if (!force) return 1;
  }

  json analysis = nullptr;
  if (cfg.kernel) {
    try {
      analysis = kernel_report(Kernel(*cfg.kernel), cfg.a_sup(), cfg.lambda0());
    } catch (const Error& e) {
      err << "error: kernel: " << e.what() << "\n";
      return 1;
    }
  }

  StagedDirectory dir(out_dir);
  EnergyTrace trace;
  try {
    trace = run(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  {
    std::ofstream csv(dir.path() / "trace.csv", std::ios::binary);
    write_trace_csv(csv, trace);
  }
  write_json_file(dir.path() / "gate.json", to_json(trace.gate));
  write_json_file(dir.path() / "kernel_analysis.json", analysis.is_null() ? json{{"kernel", nullptr}} : analysis);
  json full_manifest = manifest;
  full_manifest["schema_version"] = kSchemaVersion;
  full_manifest["output_dir"] = out_dir.string();
  full_manifest["record_stride"] = cfg.record_stride;
  full_manifest["deterministic"] = true;
  write_json_file(dir.path() / "manifest.json", full_manifest);
  json config_copy = input;
  config_copy["schema_version"] = kSchemaVersion;
  write_json_file(dir.path() / "config.json", config_copy);
  write_json_file(dir.path() / "resolved_config.json", to_json(cfg));

  json summary{{"schema_version", kSchemaVersion},
               {"steps", cfg.steps()},
               {"dt", cfg.dt},
               {"samples", trace.samples.size()},
               {"blow_up", trace.blow_up},
               {"blow_up_step", trace.blow_up_step},
               {"assumption_issues", issues},
               {"cfl", {{"dt", cfl.dt}, {"max_dt", cfl.max_dt}, {"pass", cfl.pass}}},
               {"max_abs_dissipation_residual", trace.max_abs_residual()},
               {"lambda_monitor", to_json(lambda_monitor(trace))},
               {"potential_well", to_json(potential_well_check(trace))},
               {"monotonicity", to_json(monotonicity_check(trace))},
               {"memory_rate", to_json(memory_rate_check(trace))}};
  if (cfg.kernel) {
    const Kernel kernel(*cfg.kernel);
    if (const auto cx = default_convexity(kernel))
      summary["jensen"] = to_json(jensen_bound_check(trace, *cx, cfg.damping.q));
  }
  write_json_file(dir.path() / "run_summary.json", summary);

  int code = trace.blow_up ? 2 : 0;
  if (post && !trace.blow_up) code = post(dir.path(), cfg, trace);
  dir.commit();

  out << "wrote " << out_dir.string() << " (" << trace.samples.size() << " samples";
  if (!trace.samples.empty()) out << ", E(0)=" << trace.samples.front().E << ", E(T)=" << trace.samples.back().E;
  out << ", gate " << (trace.gate.verdict ? "pass" : "fail") << ")\n";
  if (trace.blow_up) err << "blow-up detected at step " << trace.blow_up_step << "\n";
  return code;
}

int cmd_run(const std::vector<std::string>& configs, const fs::path& out_dir, const Overrides& o, bool force,
            bool sweep, int jobs, std::ostream& out, std::ostream& err) {
  auto one = [&](const std::string& path, const fs::path& target, std::ostream& o_out, std::ostream& o_err) {
    json input;
    try {
      input = read_json_file(path);
    } catch (const Error& e) {
      o_err << "error: " << e.what() << "\n";
      return 1;
    }
    apply_overrides(input, o);
    json manifest{{"config_path", path}, {"preset", nullptr}};
    return execute_run(input, target, manifest, force, o_out, o_err);
  };
  if (!sweep) return one(configs.front(), out_dir, out, err);

  // Independent runs on worker threads; output is replayed in input order.
  std::vector<std::ostringstream> outs(configs.size()), errs(configs.size());
  std::vector<int> codes(configs.size(), 0);
  std::size_t next = 0;
  std::mutex lock;
  auto worker = [&]() {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> guard(lock);
        if (next >= configs.size()) return;
        i = next++;
      }
      const fs::path target = out_dir / fs::path(configs[i]).stem();
      codes[i] = one(configs[i], target, outs[i], errs[i]);
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int code = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out << outs[i].str();
    err << errs[i].str();
    code = std::max(code, codes[i]);
  }
  return code;
}

int cmd_analyze_kernel(const std::string& path, double lambda0, double a_sup, const std::string& out_dir,
                       std::ostream& out, std::ostream& err) {
  try {
    json j = read_json_file(path);
    if (j.contains("kernel")) j = j["kernel"];
    const Kernel kernel(kernel_spec_from_json(j));
    const json report = kernel_report(kernel, a_sup, lambda0);
    print_kernel_report(out, report);
    fs::create_directories(out_dir);
    write_json_file(fs::path(out_dir) / "kernel_analysis.json", report);
    const bool ok = report["A4"]["ell_positive"].get<bool>() &&
                    (report["A5"].is_null() || report["A5"]["pass"].get<bool>());
    return ok ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_fit(const std::string& trace_path, double q, double tail_fraction, std::optional<int> example,
            const std::string& out_dir, std::ostream& out, std::ostream& err) {
  try {
    const DecaySeries series = to_series(read_trace_csv(trace_path));
    DecayFitReport report = fit_decay(series, q, tail_fraction);
    if (example) {
      const ExamplePreset preset = example_preset(*example);
      add_example_envelopes(report, series, *example, Kernel(kernel_spec_from_json(preset.config["kernel"])), q);
    }
    print_decay_report(out, report);
    const fs::path dir = out_dir.empty() ? fs::path(trace_path).parent_path() : fs::path(out_dir);
    if (!dir.empty()) fs::create_directories(dir);
    write_json_file((dir.empty() ? fs::path(".") : dir) / "decay_report.json", to_json(report));
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_reproduce(int id, const fs::path& out_dir, const Overrides& o, bool force,
                  std::optional<double> tail_override, std::ostream& out, std::ostream& err) {
  ExamplePreset preset;
  json input;
  double scale = 1.0;
  try {
    preset = example_preset(id);
    input = preset.config;
    apply_overrides(input, o);
    scale = gate_scale_factor(problem_from_json(input));
    input["initial"]["u"]["amplitude"] = input["initial"]["u"]["amplitude"].get<double>() * scale;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const double tail_fraction = tail_override.value_or(preset.tail_fraction);
  json manifest{{"config_path", nullptr},  {"preset", preset.name},           {"example", id},
                {"gate_scale_factor", scale}, {"tail_fraction", tail_fraction}};
  out << "example " << id << " (" << preset.name << "), initial amplitude scale " << format_double(scale) << "\n";
  PostRun post = [&](const fs::path& dir, const ProblemConfig& cfg, const EnergyTrace& trace) {
    const DecaySeries series = to_series(trace.samples);
    DecayFitReport report = fit_decay(series, cfg.damping.q, tail_fraction);
    add_example_envelopes(report, series, id, Kernel(*cfg.kernel), cfg.damping.q);
    write_json_file(dir / "decay_report.json", to_json(report));
    print_decay_report(out, report);
    return report.envelopes_pass() ? 0 : 1;
  };
  try {
    return execute_run(input, out_dir, manifest, force, out, err, post);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal viscoelastic wave equation lab (1-D)"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a configuration and write its trace");
  std::vector<std::string> configs;
  std::string run_out = "out";
  Overrides run_over;
  bool run_force = false;
  bool sweep = false;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  run_cmd->add_option("--config", configs, "config JSON (several with --sweep)")->required();
  run_cmd->add_option("--out", run_out, "output directory");
  run_cmd->add_flag("--force", run_force, "run despite assumption-check failures");
  run_cmd->add_flag("--sweep", sweep, "run every --config into <out>/<config stem>");
  run_cmd->add_option("--jobs", jobs, "worker threads for --sweep")->check(CLI::PositiveNumber);
  add_override_flags(run_cmd, run_over);

  auto* kernel_cmd = app.add_subcommand("analyze-kernel", "kernel constants, M(delta) table and validators");
  std::string kernel_path;
  double lambda0 = 1.0;
  double a_sup = 1.0;
  std::string kernel_out = ".";
  kernel_cmd->add_option("--config,kernel", kernel_path, "kernel JSON or a config containing one")->required();
  kernel_cmd->add_option("--lambda0", lambda0, "lower bound of A");
  kernel_cmd->add_option("--a-sup", a_sup, "sup of a");
  kernel_cmd->add_option("--out", kernel_out, "directory for kernel_analysis.json");

  auto* fit_cmd = app.add_subcommand("fit", "fit decay models to a trace");
  std::string trace_path;
  double fit_q = 1.0;
  double fit_tail = 0.5;
  std::optional<int> fit_example;
  std::string fit_out;
  fit_cmd->add_option("trace", trace_path, "trace.csv")->required();
  fit_cmd->add_option("--q", fit_q, "damping exponent used for the envelopes");
  fit_cmd->add_option("--tail-fraction", fit_tail, "fraction of samples in the fit window");
  fit_cmd->add_option("--example", fit_example, "add the envelopes of example 1, 2 or 3");
  fit_cmd->add_option("--out", fit_out, "directory for decay_report.json (default: next to the trace)");

  auto* repro_cmd = app.add_subcommand("reproduce", "run an example preset, fit, and check envelopes");
  int example_id = 1;
  std::string repro_out;
  Overrides repro_over;
  bool repro_force = false;
  std::optional<double> repro_tail;
  repro_cmd->add_option("id", example_id, "example id (1, 2 or 3)")->required();
  repro_cmd->add_option("--out", repro_out, "output directory (default: example-<id>)");
  repro_cmd->add_flag("--force", repro_force, "run despite assumption-check failures");
  repro_cmd->add_option("--tail-fraction", repro_tail, "fit window fraction (default: the preset's)");
  add_override_flags(repro_cmd, repro_over);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }

  if (*run_cmd) {
    if (!sweep && configs.size() != 1) {
      err << "error: several --config values need --sweep\n";
      return 1;
    }
    return cmd_run(configs, run_out, run_over, run_force, sweep, jobs, out, err);
  }
  if (*kernel_cmd) return cmd_analyze_kernel(kernel_path, lambda0, a_sup, kernel_out, out, err);
  if (*fit_cmd) return cmd_fit(trace_path, fit_q, fit_tail, fit_example, fit_out, out, err);
  if (*repro_cmd) {
    const fs::path dir = repro_out.empty() ? fs::path("example-" + std::to_string(example_id)) : fs::path(repro_out);
    return cmd_reproduce(example_id, dir, repro_over, repro_force, repro_tail, out, err);
  }
  return 1;
}

}  // namespace viscowave
