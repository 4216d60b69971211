#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "viscowave/convexity.hpp"
#include "viscowave/envelope.hpp"

namespace viscowave {

/// Energies are clipped to this floor before taking logarithms.
inline constexpr double kEnergyFloor = 1e-300;
inline constexpr std::size_t kMinFitSamples = 8;

/// A (t, E) series, usually the recorded part of a trace.
struct DecaySeries {
  std::vector<double> t;
  std::vector<double> E;
  std::size_t size() const { return t.size(); }
};

/// Samples [begin, end) of the last `fraction` of the series.
struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

Window tail_window(const DecaySeries& s, double fraction);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool r2_defined = true;  // false when ln E is constant on the window
  std::size_t samples = 0;
};

/// Ordinary least squares of y on x over the window.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, Window w);

struct ExponentialFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double r2 = 0.0;
  bool r2_defined = true;
};
struct PolynomialFit {
  double c = 0.0;
  double alpha = 0.0;
  double r2 = 0.0;
  bool r2_defined = true;
};
struct StretchedFit {
  double c = 0.0;
  double rate = 0.0;
  double beta = 0.0;
  double r2 = 0.0;
  bool r2_defined = true;
};

/// E ~ c1 exp(-c2 t) by OLS on (t, ln E).
ExponentialFit fit_exponential(const DecaySeries& s, double tail_fraction = 0.5);
/// E ~ c (1+t)^{-alpha} by OLS on (ln(1+t), ln E).
PolynomialFit fit_polynomial(const DecaySeries& s, double tail_fraction = 0.5);
/// E ~ c exp(-rate t^beta) for a fixed beta, by OLS on (t^beta, ln E).
StretchedFit fit_stretched(const DecaySeries& s, double beta, double tail_fraction = 0.5);
/// As above with beta chosen in [0.05, 1] by golden-section search on R^2.
StretchedFit fit_stretched_free(const DecaySeries& s, double tail_fraction = 0.5);

/// Exponential vs polynomial by R^2; "ambiguous" when they differ by less than 0.005.
std::string select_model(const ExponentialFit& e, const PolynomialFit& p);
inline constexpr double kAmbiguityMargin = 0.005;

struct EnvelopeVerdict {
  std::string name;
  DecayEnvelope envelope;
  double sup_ratio = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;  // undefined or non-positive envelope values
  bool required = true;
  bool pass = false;
};

/// sup of E/envelope over the window; pass iff sup <= 1 + slack.
EnvelopeVerdict envelope_check(const DecaySeries& s, const DecayEnvelope& env, Window check,
                               double slack = 0.05);

/// The first and second halves of the tail window: constants are fitted on
/// the first, the bound is checked on the second.
std::pair<Window, Window> split_window(Window tail);

/// amplitude exp(-rate t): rate by OLS on the fit window, amplitude the
/// smallest value bounding E there.
DecayEnvelope fit_exponential_envelope(const DecaySeries& s, Window fit);
/// amplitude exp(-rate t^beta) with fixed beta.
DecayEnvelope fit_stretched_envelope(const DecaySeries& s, Window fit, double beta);
/// amplitude (1+t)^{-exponent} with fixed exponent.
DecayEnvelope fit_polynomial_envelope(const DecaySeries& s, Window fit, double exponent);
/// (1/eps1) G1^{-1}(k1 int_0^t xi): k1 by golden-section search on the log
/// misfit, eps1 the largest value that still bounds E on the fit window.
DecayEnvelope fit_g1_envelope(const DecaySeries& s, Window fit, std::shared_ptr<const ConvexityData> cx);
/// E(0) (t G2^{-1}(k2/(t int_0^t xi)))^{2/(q+1)} with eps1 = 1 and the
/// smallest k2 bounding E on the fit window.
DecayEnvelope fit_g2_envelope(const DecaySeries& s, Window fit, std::shared_ptr<const ConvexityData> cx,
                              double q);

struct IntegralCheck {
  double q = 1.0;
  double horizon = 0.0;
  double I_quarter = 0.0;
  double I_half = 0.0;
  double I_full = 0.0;
  double increment_early = 0.0;  // I(T/2) - I(T/4)
  double increment_late = 0.0;   // I(T) - I(T/2)
  double ratio = 0.0;
  bool decreasing = false;
  bool borderline = false;  // ratio above 0.9
};

/// Trapezoid integrals of E^{(q+1)/2} up to T/4, T/2 and T.
IntegralCheck integral_decay_check(const DecaySeries& s, double q);

struct DecayFitReport {
  double tail_fraction = 0.5;
  double tail_start = 0.0;
  ExponentialFit exp_fit;
  PolynomialFit poly_fit;
  std::optional<StretchedFit> stretched_fit;
  std::optional<StretchedFit> stretched_free_fit;
  std::string selected_model;
  std::vector<EnvelopeVerdict> envelope_verdicts;
  IntegralCheck integral_check;
  std::vector<double> candidate_exponents;
  bool envelopes_pass() const;
};

nlohmann::json to_json(const DecayEnvelope& env);
nlohmann::json to_json(const EnvelopeVerdict& v);
nlohmann::json to_json(const IntegralCheck& c);
nlohmann::json to_json(const DecayFitReport& r);

}  // namespace viscowave
