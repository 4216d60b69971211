#include "viscowave/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "viscowave/errors.hpp"
#include "viscowave/quadrature.hpp"

namespace viscowave {

namespace {

void require_nonnegative_time(double t) {
  if (!(t >= 0.0)) {
    std::ostringstream msg;
    msg << "kernel evaluated at negative time t=" << t;
    throw DomainError(msg.str());
  }
}

// Fritsch–Butland slopes; shape preserving for monotone data.
Eigen::VectorXd monotone_slopes(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd h = x.tail(n - 1) - x.head(n - 1);
  Eigen::VectorXd delta = (y.tail(n - 1) - y.head(n - 1)).cwiseQuotient(h);
  if (n == 2) {
    d.setConstant(delta(0));
    return d;
  }
  for (Eigen::Index k = 1; k < n - 1; ++k) {
    if (delta(k - 1) * delta(k) <= 0.0) continue;
    const double w1 = 2.0 * h(k) + h(k - 1);
    const double w2 = h(k) + 2.0 * h(k - 1);
    d(k) = (w1 + w2) / (w1 / delta(k - 1) + w2 / delta(k));
  }
  auto end_slope = [](double h0, double h1, double m0, double m1) {
    double s = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (s * m0 <= 0.0) return 0.0;
    if (m0 * m1 < 0.0 && std::abs(s) > 3.0 * std::abs(m0)) return 3.0 * m0;
    return s;
  };
  d(0) = end_slope(h(0), h(1), delta(0), delta(1));
  d(n - 1) = end_slope(h(n - 2), h(n - 3), delta(n - 2), delta(n - 3));
  return d;
}

// Integral of the Hermite cubic on [x0, x0+h] restricted to [x0 + s*h, x0 + h].
double hermite_integral_from(double s, double h, double y0, double y1, double d0, double d1) {
  auto h00 = [](double z) { return 0.5 * z * z * z * z - z * z * z + z; };
  auto h10 = [](double z) { return 0.25 * z * z * z * z - 2.0 / 3.0 * z * z * z + 0.5 * z * z; };
  auto h01 = [](double z) { return -0.5 * z * z * z * z + z * z * z; };
  auto h11 = [](double z) { return 0.25 * z * z * z * z - z * z * z / 3.0; };
  return h * ((h00(1) - h00(s)) * y0 + (h10(1) - h10(s)) * h * d0 + (h01(1) - h01(s)) * y1 +
              (h11(1) - h11(s)) * h * d1);
}

Eigen::Index knot_interval(const Eigen::VectorXd& knots, double t) {
  const auto* begin = knots.data();
  const auto* end = begin + knots.size();
  const auto* it = std::upper_bound(begin, end, t);
  return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(it - begin) - 1, 0, knots.size() - 2);
}

std::vector<double> validation_grid() {
  std::vector<double> grid{0.0};
  for (int i = 0; i <= 240; ++i) grid.push_back(std::pow(10.0, -6.0 + 10.0 * i / 240.0));
  for (int i = 1; i <= 400; ++i) grid.push_back(0.25 * i);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::shifted_exponential: return "shifted-exponential";
    case KernelFamily::stretched_exponential: return "stretched-exponential";
    case KernelFamily::power_law: return "power-law";
    case KernelFamily::tabulated: return "tabulated";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "shifted-exponential") return KernelFamily::shifted_exponential;
  if (name == "stretched-exponential") return KernelFamily::stretched_exponential;
  if (name == "power-law") return KernelFamily::power_law;
  if (name == "tabulated") return KernelFamily::tabulated;
  throw ConfigError("unknown kernel family '" + name + "'");
}

nlohmann::json to_json(const KernelSpec& spec) {
  nlohmann::json j = {{"family", to_string(spec.family)}, {"alpha", spec.alpha}, {"beta", spec.beta}};
  if (!spec.samples.empty()) {
    auto arr = nlohmann::json::array();
    for (const auto& [t, f] : spec.samples) arr.push_back({t, f});
    j["samples"] = arr;
  }
  return j;
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("kernel: expected a JSON object");
  KernelSpec spec;
  if (!j.contains("family") || !j["family"].is_string())
    throw ConfigError("kernel.family: expected a string");
  spec.family = kernel_family_from_string(j["family"].get<std::string>());
  auto number = [&j](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("kernel.") + key + ": expected a number");
    return j[key].get<double>();
  };
  spec.alpha = number("alpha", 0.0);
  spec.beta = number("beta", 0.0);
  if (j.contains("samples") && !j["samples"].is_null()) {
    if (!j["samples"].is_array()) throw ConfigError("kernel.samples: expected an array of [t, f] pairs");
    for (const auto& pair : j["samples"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
        throw ConfigError("kernel.samples: every entry must be a [t, f] pair of numbers");
      spec.samples.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
  }
  return spec;
}

Kernel::Kernel(KernelSpec spec) : spec_(std::move(spec)) {
  switch (spec_.family) {
    case KernelFamily::shifted_exponential:
      if (!(spec_.alpha > 0.0 && spec_.beta > 0.0))
        throw DomainError("shifted-exponential kernel needs alpha > 0 and beta > 0");
      break;
    case KernelFamily::stretched_exponential:
      if (!(spec_.alpha > 0.0 && spec_.beta > 0.0 && spec_.beta < 1.0))
        throw DomainError("stretched-exponential kernel needs alpha > 0 and 0 < beta < 1");
      break;
    case KernelFamily::power_law:
      if (!(spec_.alpha > 0.0 && spec_.beta > 0.0))
        throw DomainError("power-law kernel needs alpha > 0 and beta > 0");
      break;
    case KernelFamily::tabulated:
      prepare_table();
      break;
  }
  const auto grid = validation_grid();
  double previous = kernel_value(*this, 0.0);
  if (!(previous > 0.0)) throw DomainError("kernel must satisfy f(0) > 0");
  for (double t : grid) {
    const double value = kernel_value(*this, t);
    if (!(value >= 0.0)) throw DomainError("kernel takes a negative value");
    if (value > previous + 1e-12) throw DomainError("kernel is not nonincreasing");
    previous = value;
  }
}

void Kernel::prepare_table() {
  auto samples = spec_.samples;
  if (samples.size() < 2) throw DomainError("tabulated kernel needs at least two samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<Eigen::Index>(samples.size());
  knots_.resize(n);
  values_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    knots_(i) = samples[static_cast<std::size_t>(i)].first;
    values_(i) = samples[static_cast<std::size_t>(i)].second;
  }
  if (knots_(0) != 0.0) throw DomainError("tabulated kernel must start at t = 0");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(knots_(i) > knots_(i - 1))) throw DomainError("tabulated kernel has repeated sample times");
    if (values_(i) > values_(i - 1)) throw DomainError("tabulated kernel is not nonincreasing");
  }
  if (values_.minCoeff() < 0.0) throw DomainError("tabulated kernel takes a negative value");
  slopes_ = monotone_slopes(knots_, values_);

  const double f_last = values_(n - 1);
  const double f_prev = values_(n - 2);
  if (f_last == 0.0) {
    tail_rate_ = std::numeric_limits<double>::infinity();
  } else if (f_prev > f_last) {
    tail_rate_ = std::log(f_prev / f_last) / (knots_(n - 1) - knots_(n - 2));
  } else {
    tail_rate_ = 0.0;
  }
  tail_mass_.resize(n);
  if (f_last == 0.0) tail_mass_(n - 1) = 0.0;
  else if (tail_rate_ > 0.0) tail_mass_(n - 1) = f_last / tail_rate_;
  else tail_mass_(n - 1) = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = n - 2; k >= 0; --k) {
    const double h = knots_(k + 1) - knots_(k);
    tail_mass_(k) = tail_mass_(k + 1) +
                    hermite_integral_from(0.0, h, values_(k), values_(k + 1), slopes_(k), slopes_(k + 1));
  }
}

double kernel_value(const Kernel& k, double t) {
  require_nonnegative_time(t);
  const double a = k.alpha();
  const double b = k.beta();
  switch (k.family()) {
    case KernelFamily::shifted_exponential: return a * std::exp(-b * (1.0 + t));
    case KernelFamily::stretched_exponential: return a * std::exp(-std::pow(t, b));
    case KernelFamily::power_law: return a * std::pow(1.0 + t, -b);
    case KernelFamily::tabulated: {
      const auto& x = k.knots();
      const auto& y = k.knot_values();
      const auto& d = k.knot_slopes();
      const Eigen::Index n = x.size();
      if (t >= x(n - 1)) {
        if (y(n - 1) == 0.0) return 0.0;
        return y(n - 1) * std::exp(-k.tail_rate() * (t - x(n - 1)));
      }
      const Eigen::Index i = knot_interval(x, t);
      const double h = x(i + 1) - x(i);
      const double s = (t - x(i)) / h;
      const double s2 = s * s;
      const double s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * y(i) + (s3 - 2 * s2 + s) * h * d(i) + (-2 * s3 + 3 * s2) * y(i + 1) +
             (s3 - s2) * h * d(i + 1);
    }
  }
  return 0.0;
}

double kernel_slope(const Kernel& k, double t) {
  require_nonnegative_time(t);
  const double a = k.alpha();
  const double b = k.beta();
  switch (k.family()) {
    case KernelFamily::shifted_exponential: return -b * a * std::exp(-b * (1.0 + t));
    case KernelFamily::stretched_exponential:
      if (t == 0.0) throw SingularDerivativeError("stretched-exponential kernel: f'(0) is unbounded");
      return -a * b * std::pow(t, b - 1.0) * std::exp(-std::pow(t, b));
    case KernelFamily::power_law: return -a * b * std::pow(1.0 + t, -b - 1.0);
    case KernelFamily::tabulated: {
      const auto& x = k.knots();
      const auto& y = k.knot_values();
      const auto& d = k.knot_slopes();
      const Eigen::Index n = x.size();
      if (t >= x(n - 1)) {
        if (y(n - 1) == 0.0) return 0.0;
        return -k.tail_rate() * kernel_value(k, t);
      }
      const Eigen::Index i = knot_interval(x, t);
      const double h = x(i + 1) - x(i);
      const double s = (t - x(i)) / h;
      const double s2 = s * s;
      return (6 * s2 - 6 * s) / h * y(i) + (3 * s2 - 4 * s + 1) * d(i) + (-6 * s2 + 6 * s) / h * y(i + 1) +
             (3 * s2 - 2 * s) * d(i + 1);
    }
  }
  return 0.0;
}

double upper_incomplete_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("upper_incomplete_gamma needs a > 0 and x >= 0");
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  if (x == 0.0) return std::tgamma(a);
  const double prefactor = std::exp(-x + a * std::log(x));
  if (x < a + 1.0) {
    // Series for the lower function, then subtract from Gamma(a).
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < 1000; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::tgamma(a) - sum * prefactor;
  }
  // Modified Lentz continued fraction.
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return prefactor * h;
}

double tail_mass(const Kernel& k, double t) {
  require_nonnegative_time(t);
  const double a = k.alpha();
  const double b = k.beta();
  switch (k.family()) {
    case KernelFamily::shifted_exponential: return a * std::exp(-b * (1.0 + t)) / b;
    case KernelFamily::stretched_exponential:
      // substitute w = s^beta: (alpha/beta) Gamma(1/beta, t^beta)
      return a / b * upper_incomplete_gamma(1.0 / b, std::pow(t, b));
    case KernelFamily::power_law:
      if (b <= 1.0) {
        std::ostringstream msg;
        msg << "power-law kernel with beta=" << b << " has a non-integrable tail (needs beta > 1)";
        throw NonIntegrableError(msg.str());
      }
      return a * std::pow(1.0 + t, 1.0 - b) / (b - 1.0);
    case KernelFamily::tabulated: {
      const auto& x = k.knots();
      const auto& y = k.knot_values();
      const auto& d = k.knot_slopes();
      const auto& mass = k.knot_tail_mass();
      const Eigen::Index n = x.size();
      if (!std::isfinite(mass(n - 1)))
        throw NonIntegrableError("tabulated kernel has a flat tail; its integral diverges");
      if (t >= x(n - 1)) {
        if (y(n - 1) == 0.0) return 0.0;
        return kernel_value(k, t) / k.tail_rate();
      }
      const Eigen::Index i = knot_interval(x, t);
      const double h = x(i + 1) - x(i);
      const double s = (t - x(i)) / h;
      return mass(i + 1) + hermite_integral_from(s, h, y(i), y(i + 1), d(i), d(i + 1));
    }
  }
  return 0.0;
}

double residual_stiffness(const Kernel& k, double a_sup, double lambda0) {
  if (!(lambda0 > 0.0)) throw DomainError("lambda0 must be positive");
  return lambda0 - a_sup * tail_mass(k, 0.0);
}

double shifted_log_decay(const Kernel& k, double delta, double s) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  const double f = kernel_value(k, s);
  if (f == 0.0) throw DomainError("K_delta undefined where the kernel vanishes");
  return -kernel_slope(k, s) / f + delta;
}

double damped_mass(const Kernel& k, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  // f/K_delta = f^2 / (delta f - f'); vanishes where f does.
  auto integrand = [&k, delta](double s) {
    const double f = kernel_value(k, s);
    if (f == 0.0) return 0.0;
    return f * f / (delta * f - kernel_slope(k, s));
  };
  constexpr double rel_tol = 1e-12;
  double total = 0.0;
  double error = 0.0;
  bool ok = true;
  double split = 1.0;
  if (k.family() == KernelFamily::tabulated) {
    const auto& x = k.knots();
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      auto r = quad::integrate(integrand, x(i), x(i + 1), 1e-300, rel_tol);
      total += r.value;
      error += r.abs_error;
      ok = ok && r.converged;
    }
    split = x(x.size() - 1);
  } else {
    auto head = quad::integrate(integrand, 0.0, split, 1e-300, rel_tol);
    total += head.value;
    error += head.abs_error;
    ok = ok && head.converged;
  }
  auto tail = quad::integrate_to_infinity(integrand, split, 1e-300, rel_tol, 8000);
  total += tail.value;
  error += tail.abs_error;
  ok = ok && tail.converged;
  if (!ok && error > 1e-9 * std::abs(total)) {
    std::ostringstream msg;
    msg << "M(delta) quadrature did not converge: delta=" << delta << " estimate=" << total
        << " error=" << error;
    throw NumericalError(msg.str());
  }
  return total;
}

KernelAnalysis analyze_kernel(const Kernel& k, double a_sup, double lambda0,
                              const std::vector<double>& deltas, double horizon, int tail_points) {
  KernelAnalysis out;
  out.lambda0 = lambda0;
  out.a_sup = a_sup;
  out.f0 = kernel_value(k, 0.0);
  out.total_mass = tail_mass(k, 0.0);
  out.ell = residual_stiffness(k, a_sup, lambda0);
  for (int i = 0; i < tail_points; ++i) {
    const double t = horizon * i / std::max(1, tail_points - 1);
    out.tail_table.emplace_back(t, tail_mass(k, t));
  }
  for (double d : deltas) out.damped_table.emplace_back(d, damped_mass(k, d));
  out.monotone = true;
  for (std::size_t i = 1; i < out.tail_table.size(); ++i)
    if (out.tail_table[i].second > out.tail_table[i - 1].second) out.monotone = false;
  return out;
}

nlohmann::json to_json(const KernelAnalysis& a) {
  nlohmann::json j;
  j["ell"] = a.ell;
  j["f0"] = a.f0;
  j["total_mass"] = a.total_mass;
  j["lambda0"] = a.lambda0;
  j["a_sup"] = a.a_sup;
  auto tail = nlohmann::json::array();
  for (const auto& [t, F] : a.tail_table) tail.push_back({t, F});
  j["F_table"] = tail;
  auto damped = nlohmann::json::array();
  for (const auto& [d, M] : a.damped_table) damped.push_back({{"delta", d}, {"M", M}, {"delta_M", d * M}});
  j["M_table"] = damped;
  return j;
}

}  // namespace viscowave
