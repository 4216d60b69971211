#include "viscowave/decay.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "viscowave/errors.hpp"

namespace viscowave {

namespace {

std::vector<double> log_energy(const DecaySeries& s) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::log(std::max(s.E[i], kEnergyFloor));
  return out;
}

Window checked_tail(const DecaySeries& s, double tail_fraction) {
  const Window w = tail_window(s, tail_fraction);
  if (w.size() < kMinFitSamples) {
    std::ostringstream msg;
    msg << "decay fit needs at least " << kMinFitSamples << " tail samples, got " << w.size();
    throw InsufficientDataError(msg.str());
  }
  return w;
}

double golden_minimize(const std::function<double(double)>& f, double a, double b, int iterations) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

}  // namespace

Window tail_window(const DecaySeries& s, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("tail fraction must lie in (0, 1]");
  const std::size_t n = s.size();
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  return Window{n - std::min(count, n), n};
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, Window w) {
  LineFit fit;
  fit.samples = w.size();
  if (w.size() < 2) throw InsufficientDataError("line fit needs at least two samples");
  const double n = static_cast<double>(w.size());
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = w.begin; i < w.end; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = w.begin; i < w.end; ++i) {
    const double dx = x[i] - xm;
    const double dy = y[i] - ym;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("line fit: abscissae are all equal");
  // rounding in the mean leaves syy ~ n (eps ym)^2 for a constant series
  const double flat = 1e-24 * n * std::max(1.0, ym * ym);
  if (!(syy > flat)) {
    fit.intercept = ym;
    fit.r2_defined = false;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  fit.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

ExponentialFit fit_exponential(const DecaySeries& s, double tail_fraction) {
  const Window w = checked_tail(s, tail_fraction);
  const LineFit line = fit_line(s.t, log_energy(s), w);
  return ExponentialFit{std::exp(line.intercept), -line.slope, line.r2, line.r2_defined};
}

PolynomialFit fit_polynomial(const DecaySeries& s, double tail_fraction) {
  const Window w = checked_tail(s, tail_fraction);
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = std::log1p(s.t[i]);
  const LineFit line = fit_line(x, log_energy(s), w);
  return PolynomialFit{std::exp(line.intercept), -line.slope, line.r2, line.r2_defined};
}

StretchedFit fit_stretched(const DecaySeries& s, double beta, double tail_fraction) {
  if (!(beta > 0.0)) throw DomainError("stretched fit needs beta > 0");
  const Window w = checked_tail(s, tail_fraction);
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = std::pow(s.t[i], beta);
  const LineFit line = fit_line(x, log_energy(s), w);
  return StretchedFit{std::exp(line.intercept), -line.slope, beta, line.r2, line.r2_defined};
}

StretchedFit fit_stretched_free(const DecaySeries& s, double tail_fraction) {
  const double beta = golden_minimize(
      [&](double b) { return -fit_stretched(s, b, tail_fraction).r2; }, 0.05, 1.0, 60);
  return fit_stretched(s, beta, tail_fraction);
}

std::string select_model(const ExponentialFit& e, const PolynomialFit& p) {
  if (std::abs(e.r2 - p.r2) < kAmbiguityMargin) return "ambiguous";
  return e.r2 > p.r2 ? "exponential" : "polynomial";
}

std::pair<Window, Window> split_window(Window tail) {
  const std::size_t mid = tail.begin + tail.size() / 2;
  return {Window{tail.begin, mid}, Window{mid, tail.end}};
}

EnvelopeVerdict envelope_check(const DecaySeries& s, const DecayEnvelope& env, Window check, double slack) {
  EnvelopeVerdict v;
  v.name = to_string(env.model);
  v.envelope = env;
  for (std::size_t i = check.begin; i < check.end; ++i) {
    const double bound = env(s.t[i]);
    if (!std::isfinite(bound) || !(bound > 0.0)) {
      ++v.excluded;
      continue;
    }
    ++v.checked;
    v.sup_ratio = std::max(v.sup_ratio, s.E[i] / bound);
  }
  v.pass = v.checked > 0 && v.sup_ratio <= 1.0 + slack;
  return v;
}

namespace {

// Smallest amplitude with amplitude * shape(t_i) >= E_i on the window.
double bounding_amplitude(const DecaySeries& s, Window w, const std::function<double(double)>& log_shape) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = w.begin; i < w.end; ++i)
    best = std::max(best, std::log(std::max(s.E[i], kEnergyFloor)) - log_shape(s.t[i]));
  return std::exp(best);
}

}  // namespace

DecayEnvelope fit_exponential_envelope(const DecaySeries& s, Window fit) {
  DecayEnvelope env;
  env.model = EnvelopeModel::exponential;
  env.rate = -fit_line(s.t, log_energy(s), fit).slope;
  env.amplitude = bounding_amplitude(s, fit, [&](double t) { return -env.rate * t; });
  return env;
}

DecayEnvelope fit_stretched_envelope(const DecaySeries& s, Window fit, double beta) {
  DecayEnvelope env;
  env.model = EnvelopeModel::stretched_exponential;
  env.exponent = beta;
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = std::pow(s.t[i], beta);
  env.rate = -fit_line(x, log_energy(s), fit).slope;
  env.amplitude = bounding_amplitude(s, fit, [&](double t) { return -env.rate * std::pow(t, beta); });
  return env;
}

DecayEnvelope fit_polynomial_envelope(const DecaySeries& s, Window fit, double exponent) {
  DecayEnvelope env;
  env.model = EnvelopeModel::polynomial;
  env.exponent = exponent;
  env.amplitude = bounding_amplitude(s, fit, [&](double t) { return -exponent * std::log1p(t); });
  return env;
}

DecayEnvelope fit_g1_envelope(const DecaySeries& s, Window fit, std::shared_ptr<const ConvexityData> cx) {
  DecayEnvelope env;
  env.model = EnvelopeModel::g1_implicit;
  env.q = 1.0;
  env.convexity = cx;
  env.g1 = std::make_shared<const G1Table>(*cx);
  env.t0 = s.t[fit.begin];
  // For a given k1: eps1 makes the envelope touch E from above; misfit is the
  // mean squared log gap over non-saturated points.
  auto evaluate = [&](double log_k, double* eps_out) {
    const double k = std::exp(log_k);
    double log_eps = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = fit.begin; i < fit.end; ++i) {
      const InverseResult inv = env.g1->inverse(k * cx->rate_integral(env.t0, s.t[i]));
      if (inv.saturated) continue;
      const double log_shape = std::log(inv.value);
      const double log_e = std::log(std::max(s.E[i], kEnergyFloor));
      pts.emplace_back(log_shape, log_e);
      log_eps = std::min(log_eps, log_shape - log_e);
    }
    if (pts.size() < kMinFitSamples) return std::numeric_limits<double>::infinity();
    double misfit = 0.0;
    for (const auto& [ls, le] : pts) misfit += (ls - log_eps - le) * (ls - log_eps - le);
    if (eps_out) *eps_out = std::exp(log_eps);
    return misfit / static_cast<double>(pts.size());
  };
  // coarse scan, then golden-section refinement around the best node
  const double lo = std::log(1e-4), hi = std::log(1e2);
  const int nodes = 61;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int j = 0; j < nodes; ++j) {
    const double value = evaluate(lo + (hi - lo) * j / (nodes - 1), nullptr);
    if (value < best_value) {
      best_value = value;
      best = j;
    }
  }
  const double step = (hi - lo) / (nodes - 1);
  const double center = lo + step * best;
  double log_k = golden_minimize([&](double x) { return evaluate(x, nullptr); }, center - step,
                                 center + step, 50);
  double eps1 = 1.0;
  if (!std::isfinite(evaluate(log_k, &eps1))) {
    log_k = center;
    evaluate(center, &eps1);
  }
  env.rate = std::exp(log_k);
  env.eps1 = eps1;
  env.amplitude = 1.0 / eps1;
  return env;
}

DecayEnvelope fit_g2_envelope(const DecaySeries& s, Window fit, std::shared_ptr<const ConvexityData> cx,
                              double q) {
  DecayEnvelope env;
  env.model = EnvelopeModel::g2_implicit;
  env.q = q;
  env.convexity = cx;
  env.eps1 = 1.0;
  env.t0 = 0.0;
  env.energy0 = s.E.front();
  // The envelope is increasing in k2; each sample fixes the k2 that makes it tight.
  double k2 = 0.0;
  for (std::size_t i = fit.begin; i < fit.end; ++i) {
    const double t = s.t[i];
    if (!(t > 0.0)) continue;
    const double z = std::pow(std::max(s.E[i], 0.0) / env.energy0, 0.5 * (q + 1.0));
    const double weight = t * cx->rate_integral(0.0, t);
    k2 = std::max(k2, weight * g2_map(*cx, env.eps1, z / t));
  }
  env.rate = k2;
  return env;
}

IntegralCheck integral_decay_check(const DecaySeries& s, double q) {
  IntegralCheck c;
  c.q = q;
  if (s.size() < 2) return c;
  c.horizon = s.t.back();
  const double power = 0.5 * (q + 1.0);
  auto integrand = [&](std::size_t i) { return std::pow(std::max(s.E[i], 0.0), power); };
  // Trapezoid over [x0, x1] on the piecewise-linear interpolant of the integrand.
  auto integral = [&](double x0, double x1) {
    double total = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double a = s.t[i - 1], b = s.t[i];
      const double lo = std::max(a, x0), hi = std::min(b, x1);
      if (!(hi > lo)) continue;
      const double fa = integrand(i - 1), fb = integrand(i);
      const double flo = fa + (fb - fa) * (lo - a) / (b - a);
      const double fhi = fa + (fb - fa) * (hi - a) / (b - a);
      total += 0.5 * (hi - lo) * (flo + fhi);
    }
    return total;
  };
  const double t0 = s.t.front();
  c.I_quarter = integral(t0, 0.25 * c.horizon);
  c.increment_early = integral(0.25 * c.horizon, 0.5 * c.horizon);
  c.increment_late = integral(0.5 * c.horizon, c.horizon);
  c.I_half = c.I_quarter + c.increment_early;
  c.I_full = c.I_half + c.increment_late;
  c.ratio = c.increment_early > 0.0 ? c.increment_late / c.increment_early : 0.0;
  c.decreasing = c.increment_late < c.increment_early || (c.increment_early == 0.0 && c.increment_late == 0.0);
  c.borderline = c.ratio > 0.9;
  return c;
}

bool DecayFitReport::envelopes_pass() const {
  return std::all_of(envelope_verdicts.begin(), envelope_verdicts.end(),
                     [](const EnvelopeVerdict& v) { return !v.required || v.pass; });
}

nlohmann::json to_json(const DecayEnvelope& env) {
  nlohmann::json j{{"model", to_string(env.model)},
                   {"amplitude", env.amplitude},
                   {"rate", env.rate},
                   {"exponent", env.exponent},
                   {"q", env.q}};
  if (env.model == EnvelopeModel::g1_implicit || env.model == EnvelopeModel::g2_implicit) {
    j["eps1"] = env.eps1;
    j["t0"] = env.t0;
    j["energy0"] = env.energy0;
    j["k"] = env.rate;
    if (env.convexity) j["convexity"] = env.convexity->label;
  }
  return j;
}

nlohmann::json to_json(const EnvelopeVerdict& v) {
  return {{"name", v.name},     {"envelope", to_json(v.envelope)}, {"sup_ratio", v.sup_ratio},
          {"checked", v.checked}, {"excluded", v.excluded},         {"required", v.required},
          {"pass", v.pass}};
}

nlohmann::json to_json(const IntegralCheck& c) {
  return {{"q", c.q},
          {"horizon", c.horizon},
          {"I_quarter", c.I_quarter},
          {"I_half", c.I_half},
          {"I_full", c.I_full},
          {"increment_early", c.increment_early},
          {"increment_late", c.increment_late},
          {"ratio", c.ratio},
          {"decreasing", c.decreasing},
          {"borderline", c.borderline}};
}

nlohmann::json to_json(const DecayFitReport& r) {
  auto r2 = [](double value, bool defined) { return defined ? nlohmann::json(value) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["schema_version"] = 1;
  j["tail_fraction"] = r.tail_fraction;
  j["tail_start"] = r.tail_start;
  j["exp_fit"] = {{"c1", r.exp_fit.c1}, {"c2", r.exp_fit.c2}, {"R2", r2(r.exp_fit.r2, r.exp_fit.r2_defined)}};
  j["poly_fit"] = {{"c", r.poly_fit.c}, {"alpha", r.poly_fit.alpha},
                   {"R2", r2(r.poly_fit.r2, r.poly_fit.r2_defined)}};
  auto stretched = [&](const std::optional<StretchedFit>& f) {
    if (!f) return nlohmann::json(nullptr);
    return nlohmann::json{{"c", f->c}, {"rate", f->rate}, {"beta_s", f->beta}, {"R2", r2(f->r2, f->r2_defined)}};
  };
  j["stretched_fit"] = stretched(r.stretched_fit);
  j["stretched_free_fit"] = stretched(r.stretched_free_fit);
  j["selected_model"] = r.selected_model;
  j["envelope_verdicts"] = nlohmann::json::array();
  for (const auto& v : r.envelope_verdicts) j["envelope_verdicts"].push_back(to_json(v));
  j["integral_check"] = to_json(r.integral_check);
  j["candidate_exponents"] = r.candidate_exponents;
  j["envelopes_pass"] = r.envelopes_pass();
  return j;
}

}  // namespace viscowave
