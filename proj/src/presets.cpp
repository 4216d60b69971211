#include "viscowave/presets.hpp"

#include "viscowave/errors.hpp"

namespace viscowave {

ExamplePreset example_preset(int id) {
  nlohmann::json cfg{{"length", 1.0},
                     {"t_end", 150.0},
                     {"cfl_fraction", 0.9},
                     {"p", 3.0},
                     {"damping", {{"q", 1.0}, {"scale", 1.0}}},
                     {"coefficients", {{"A", 1.0}, {"a", 1.0}, {"b", 1.0}, {"k", 0.01}}},
                     {"initial", {{"u", {{"preset", "sine"}, {"amplitude", 1.0}}}, {"v", {{"preset", "zero"}}}}},
                     {"gate_relax", 1.0}};
  ExamplePreset preset;
  preset.id = id;
  switch (id) {
    case 1:
      preset.name = "shifted-exponential";
      cfg["kernel"] = {{"family", "shifted-exponential"}, {"alpha", 0.1}, {"beta", 1.0}};
      cfg["n_cells"] = 400;
      cfg["conv_strategy"] = "prony";
      cfg["record_stride"] = 10;
      break;
    case 2:
      preset.name = "stretched-exponential";
      cfg["kernel"] = {{"family", "stretched-exponential"}, {"alpha", 0.2}, {"beta", 0.5}};
      cfg["n_cells"] = 100;
      cfg["conv_strategy"] = "direct";
      cfg["record_stride"] = 5;
      break;
    case 3:
      preset.name = "power-law";
      cfg["kernel"] = {{"family", "power-law"}, {"alpha", 0.05}, {"beta", 2.0}};
      cfg["damping"]["q"] = 2.0;
      cfg["n_cells"] = 100;
      cfg["conv_strategy"] = "direct";
      cfg["record_stride"] = 5;
      // telling t^{-alpha} from exp(-ct) needs a window spanning more than a factor 2 in t
      preset.tail_fraction = 0.75;
      break;
    default:
      throw ConfigError("unknown example id " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
  preset.config = cfg;
  return preset;
}

std::shared_ptr<const ConvexityData> default_convexity(const Kernel& kernel) {
  const double f0 = kernel_value(kernel, 0.0);
  switch (kernel.family()) {
    case KernelFamily::shifted_exponential:
      return std::make_shared<const ConvexityData>(linear_convexity(kernel.beta(), f0));
    case KernelFamily::stretched_exponential:
      return std::make_shared<const ConvexityData>(stretched_convexity(kernel.alpha(), kernel.beta()));
    case KernelFamily::power_law:
      return std::make_shared<const ConvexityData>(power_convexity((kernel.beta() + 1.0) / kernel.beta(), f0));
    case KernelFamily::tabulated:
      return nullptr;
  }
  return nullptr;
}

DecayFitReport fit_decay(const DecaySeries& s, double q, double tail_fraction) {
  DecayFitReport r;
  r.tail_fraction = tail_fraction;
  const Window tail = tail_window(s, tail_fraction);
  r.exp_fit = fit_exponential(s, tail_fraction);
  r.poly_fit = fit_polynomial(s, tail_fraction);
  r.tail_start = s.t[tail.begin];
  r.selected_model = select_model(r.exp_fit, r.poly_fit);
  r.integral_check = integral_decay_check(s, q);
  r.candidate_exponents = {-2.0 / (q + 1.0)};

  const auto [fit, check] = split_window(tail);
  EnvelopeVerdict baseline = envelope_check(s, fit_polynomial_envelope(s, fit, 2.0 / (q + 1.0)), check);
  baseline.name = "baseline-polynomial";
  r.envelope_verdicts.push_back(baseline);
  EnvelopeVerdict exponential = envelope_check(s, fit_exponential_envelope(s, fit), check);
  exponential.required = r.selected_model == "exponential";
  r.envelope_verdicts.push_back(exponential);
  return r;
}

void add_example_envelopes(DecayFitReport& r, const DecaySeries& s, int example_id, const Kernel& kernel,
                           double q) {
  const auto cx = default_convexity(kernel);
  const auto [fit, check] = split_window(tail_window(s, r.tail_fraction));
  auto informational = [&](EnvelopeVerdict v) {
    v.required = false;
    r.envelope_verdicts.push_back(std::move(v));
  };
  if (example_id == 1) {
    if (q == 1.0) {
      for (auto& v : r.envelope_verdicts)
        if (v.name == "exponential") v.required = true;
      informational(envelope_check(s, fit_g1_envelope(s, fit, cx), check));
    } else {
      EnvelopeVerdict fast = envelope_check(s, fit_polynomial_envelope(s, fit, 2.0 / (q - 1.0)), check);
      fast.name = "polynomial-2/(q-1)";
      informational(fast);
      informational(envelope_check(s, fit_g2_envelope(s, fit, cx, q), check));
    }
  } else if (example_id == 2) {
    r.stretched_fit = fit_stretched(s, kernel.beta(), r.tail_fraction);
    r.stretched_free_fit = fit_stretched_free(s, r.tail_fraction);
    r.envelope_verdicts.push_back(envelope_check(s, fit_stretched_envelope(s, fit, kernel.beta()), check));
    if (q == 1.0) informational(envelope_check(s, fit_g1_envelope(s, fit, cx), check));
  } else if (example_id == 3) {
    if (q > 1.0) {
      r.candidate_exponents = {-2.0 / (q + 1.0), -2.0 * (q - 1.0) / ((q + 1.0) * (q + 1.0))};
      informational(envelope_check(s, fit_g2_envelope(s, fit, cx, q), check));
    }
  }
}

}  // namespace viscowave
