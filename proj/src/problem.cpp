#include "viscowave/problem.hpp"

#include <cmath>
#include <sstream>

#include "viscowave/errors.hpp"

namespace viscowave {

namespace {

using nlohmann::json;

double number_field(const json& j, const std::string& key, std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key) || j[key].is_null()) {
    if (fallback) return *fallback;
    throw ConfigError("config field '" + key + "' is required");
  }
  if (!j[key].is_number()) throw ConfigError("config field '" + key + "': expected a number");
  return j[key].get<double>();
}

int integer_field(const json& j, const std::string& key, std::optional<int> fallback = std::nullopt) {
  if (!j.contains(key) || j[key].is_null()) {
    if (fallback) return *fallback;
    throw ConfigError("config field '" + key + "' is required");
  }
  if (!j[key].is_number_integer()) throw ConfigError("config field '" + key + "': expected an integer");
  return j[key].get<int>();
}

Vector sampled(const json& arr, Eigen::Index expected, const std::string& name) {
  if (static_cast<Eigen::Index>(arr.size()) != expected) {
    std::ostringstream msg;
    msg << "config field '" << name << "': expected " << expected << " samples, got " << arr.size();
    throw ConfigError(msg.str());
  }
  Vector out(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    const auto& v = arr[static_cast<std::size_t>(i)];
    if (!v.is_number()) throw ConfigError("config field '" + name + "': samples must be numbers");
    out(i) = v.get<double>();
  }
  return out;
}

// Coefficient field at the given sample points.
Vector coefficient_field(const json& spec, const Vector& x, double length, const std::string& name) {
  if (spec.is_number()) return Vector::Constant(x.size(), spec.get<double>());
  if (spec.is_array()) return sampled(spec, x.size(), name);
  if (!spec.is_object()) throw ConfigError("config field '" + name + "': expected number, preset object, or array");
  if (spec.contains("samples")) return sampled(spec["samples"], x.size(), name);
  const std::string preset = spec.value("preset", "constant");
  if (preset == "constant") return Vector::Constant(x.size(), number_field(spec, "value"));
  if (preset == "bump") {
    const double base = number_field(spec, "base", 0.0);
    const double height = number_field(spec, "height");
    const double center = number_field(spec, "center", 0.5 * length);
    const double width = number_field(spec, "width", 0.1 * length);
    return (base + height * (-((x.array() - center) / width).square()).exp()).matrix();
  }
  if (preset == "ramp") {
    const double left = number_field(spec, "left");
    const double right = number_field(spec, "right");
    return (left + (right - left) * x.array() / length).matrix();
  }
  throw ConfigError("config field '" + name + "': unknown preset '" + preset + "'");
}

Vector initial_field(const json& spec, const Vector& x, double length, const std::string& name) {
  if (spec.is_null()) return Vector::Zero(x.size());
  if (spec.is_array()) return sampled(spec, x.size(), name);
  if (!spec.is_object()) throw ConfigError("config field '" + name + "': expected preset object or array");
  if (spec.contains("samples")) return sampled(spec["samples"], x.size(), name);
  const std::string preset = spec.value("preset", "zero");
  Vector out;
  if (preset == "zero") {
    out = Vector::Zero(x.size());
  } else if (preset == "sine") {
    const double amplitude = number_field(spec, "amplitude", 1.0);
    const double mode = number_field(spec, "mode", 1.0);
    out = (amplitude * (mode * M_PI * x.array() / length).sin()).matrix();
  } else if (preset == "bump") {
    const double amplitude = number_field(spec, "amplitude", 1.0);
    const double center = number_field(spec, "center", 0.5 * length);
    const double width = number_field(spec, "width", 0.1 * length);
    out = (amplitude * (-((x.array() - center) / width).square()).exp() * (M_PI * x.array() / length).sin())
              .matrix();
  } else {
    throw ConfigError("config field '" + name + "': unknown preset '" + preset + "'");
  }
  out(0) = 0.0;
  out(out.size() - 1) = 0.0;
  return out;
}

json samples_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

std::string to_string(ConvolutionStrategy s) { return s == ConvolutionStrategy::direct ? "direct" : "prony"; }

ConvolutionStrategy strategy_from_string(const std::string& name) {
  if (name == "direct") return ConvolutionStrategy::direct;
  if (name == "prony" || name == "prony-recursive") return ConvolutionStrategy::prony;
  throw ConfigError("unknown convolution strategy '" + name + "' (expected direct or prony)");
}

long ProblemConfig::steps() const { return static_cast<long>(std::ceil(t_end / dt - 1e-9)); }

ProblemConfig problem_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ProblemConfig cfg;
  cfg.source = j;
  cfg.grid.length = number_field(j, "length", 1.0);
  cfg.grid.cells = integer_field(j, "n_cells");
  if (!(cfg.grid.length > 0.0)) throw ConfigError("config field 'length': must be positive");
  if (cfg.grid.cells < 16) throw ConfigError("config field 'n_cells': must be an integer >= 16");
  const Vector nodes = cfg.grid.nodes();
  const Vector mids = cfg.grid.midpoints();

  const json coeffs = j.value("coefficients", json::object());
  auto coefficient = [&](const char* name, const Vector& x, double fallback) {
    if (!coeffs.contains(name)) return Vector::Constant(x.size(), fallback).eval();
    return coefficient_field(coeffs[name], x, cfg.grid.length, std::string("coefficients.") + name);
  };
  cfg.A = coefficient("A", mids, 1.0);
  cfg.a = coefficient("a", mids, 1.0);
  cfg.b = coefficient("b", nodes, 1.0);
  cfg.k = coefficient("k", nodes, 0.0);

  cfg.p = number_field(j, "p", 3.0);
  const json damping = j.value("damping", json::object());
  cfg.damping.q = number_field(damping, "q", 1.0);
  cfg.damping.scale = number_field(damping, "scale", 1.0);

  if (j.contains("kernel") && !j["kernel"].is_null()) cfg.kernel = kernel_spec_from_json(j["kernel"]);

  const json initial = j.value("initial", json::object());
  cfg.u0 = initial_field(initial.value("u", json(nullptr)), nodes, cfg.grid.length, "initial.u");
  cfg.v0 = initial_field(initial.value("v", json(nullptr)), nodes, cfg.grid.length, "initial.v");

  const double h = cfg.grid.spacing();
  if (j.contains("dt") && !j["dt"].is_null()) {
    cfg.dt = number_field(j, "dt");
  } else {
    const double fraction = number_field(j, "cfl_fraction", 0.9);
    cfg.dt = fraction * h / std::sqrt(cfg.mu0());
  }
  if (!(cfg.dt > 0.0)) throw ConfigError("config field 'dt': must be positive");
  cfg.t_end = number_field(j, "t_end");
  if (!(cfg.t_end > 0.0)) throw ConfigError("config field 't_end': must be positive");
  cfg.record_stride = integer_field(j, "record_stride", 1);
  if (cfg.record_stride < 1) throw ConfigError("config field 'record_stride': must be >= 1");
  cfg.strategy = strategy_from_string(j.value("conv_strategy", std::string("direct")));
  cfg.gate_relax = number_field(j, "gate_relax", 1.0);
  return cfg;
}

json to_json(const ProblemConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["length"] = cfg.grid.length;
  j["n_cells"] = cfg.grid.cells;
  j["dt"] = cfg.dt;
  j["t_end"] = cfg.t_end;
  j["record_stride"] = cfg.record_stride;
  j["p"] = cfg.p;
  j["damping"] = {{"q", cfg.damping.q}, {"scale", cfg.damping.scale}};
  j["kernel"] = cfg.kernel ? to_json(*cfg.kernel) : json(nullptr);
  j["coefficients"] = {{"A", samples_json(cfg.A)},
                       {"a", samples_json(cfg.a)},
                       {"b", samples_json(cfg.b)},
                       {"k", samples_json(cfg.k)}};
  j["initial"] = {{"u", samples_json(cfg.u0)}, {"v", samples_json(cfg.v0)}};
  j["conv_strategy"] = to_string(cfg.strategy);
  j["gate_relax"] = cfg.gate_relax;
  return j;
}

CflReport cfl_check(const ProblemConfig& cfg) {
  CflReport r;
  r.dt = cfg.dt;
  r.max_dt = 0.9 * cfg.grid.spacing() / std::sqrt(cfg.mu0());
  r.pass = cfg.dt <= r.max_dt * (1.0 + 1e-12);
  std::ostringstream msg;
  if (r.pass) {
    msg << "dt=" << cfg.dt << " within CFL bound " << r.max_dt;
  } else {
    msg << "dt=" << cfg.dt << " exceeds CFL bound 0.9*h/sqrt(mu0)=" << r.max_dt << " (h=" << cfg.grid.spacing()
        << ", mu0=" << cfg.mu0() << ")";
  }
  r.message = msg.str();
  return r;
}

std::vector<std::string> validate_assumptions(const ProblemConfig& cfg) {
  std::vector<std::string> issues;
  const Eigen::Index cells = cfg.grid.cells;
  if (!(cfg.A.minCoeff() > 0.0)) issues.push_back("(A1) A must be strictly positive (min A <= 0)");
  if (!(cfg.a.minCoeff() >= 0.0)) issues.push_back("(A2) a must be nonnegative");
  if (!(cfg.b.minCoeff() >= 0.0)) issues.push_back("(A2) b must be nonnegative");
  // a averaged to nodes so that a + b can be compared pointwise
  Vector a_nodes(cells + 1);
  a_nodes(0) = cfg.a(0);
  a_nodes(cells) = cfg.a(cells - 1);
  a_nodes.segment(1, cells - 1) = 0.5 * (cfg.a.head(cells - 1) + cfg.a.tail(cells - 1));
  const double kappa = (a_nodes + cfg.b).minCoeff();
  if (!(kappa > 0.0)) issues.push_back("(A2) a + b must be bounded below by a positive constant");
  if (!(cfg.a(0) > 0.0 || cfg.a(cells - 1) > 0.0))
    issues.push_back("(A2) a must not vanish identically near the boundary");
  if (!(cfg.damping.q >= 1.0)) issues.push_back("(A3) damping exponent q must be >= 1");
  if (!(cfg.damping.scale > 0.0)) issues.push_back("(A3) damping scale must be positive");
  if (!(cfg.k.minCoeff() >= 0.0)) issues.push_back("k must be nonnegative");
  if (!(cfg.p > 2.0)) issues.push_back("source exponent p must exceed 2");
  if (cfg.kernel) {
    try {
      const Kernel kernel(*cfg.kernel);
      const double ell = residual_stiffness(kernel, cfg.a_sup(), cfg.lambda0());
      if (!(ell > 0.0)) {
        std::ostringstream msg;
        msg << "(A4) residual stiffness ell = " << ell << " is not positive";
        issues.push_back(msg.str());
      }
    } catch (const Error& e) {
      issues.push_back(std::string("(A4) ") + e.what());
    }
  }
  if (cfg.u0(0) != 0.0 || cfg.u0(cells) != 0.0) issues.push_back("initial.u must vanish at the boundary");
  if (cfg.v0(0) != 0.0 || cfg.v0(cells) != 0.0) issues.push_back("initial.v must vanish at the boundary");
  return issues;
}

}  // namespace viscowave
