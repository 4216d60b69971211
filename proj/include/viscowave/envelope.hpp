#pragma once

#include <memory>
#include <string>

#include "viscowave/convexity.hpp"
#include "viscowave/kernel.hpp"

namespace viscowave {

enum class EnvelopeModel { exponential, stretched_exponential, polynomial, g1_implicit, g2_implicit };

std::string to_string(EnvelopeModel model);

/// Upper-bounding decay curve for E(t).
///
///   exponential            amplitude * exp(-rate t)
///   stretched_exponential  amplitude * exp(-rate t^exponent)
///   polynomial             amplitude * (1 + t)^(-exponent)
///   g1_implicit            amplitude * G1^{-1}(rate * int_{t0}^t xi)          (amplitude = 1/eps1)
///   g2_implicit            energy0 * (t G2^{-1}(rate / (t int_{t0}^t xi)))^(2/(q+1))
///
/// Evaluation returns NaN where the envelope is undefined (t <= t0 for the
/// implicit forms, or a saturated G1 inverse).
struct DecayEnvelope {
  EnvelopeModel model = EnvelopeModel::exponential;
  double amplitude = 1.0;
  double rate = 0.0;
  double exponent = 0.0;
  double eps1 = 1.0;
  double t0 = 0.0;
  double energy0 = 1.0;
  double q = 1.0;
  std::shared_ptr<const ConvexityData> convexity;
  std::shared_ptr<const G1Table> g1;

  double operator()(double t) const;
};

/// Free constants of the implicit envelopes; they are fitted, never derived.
struct EnvelopeConstants {
  double amplitude = 1.0;  // C for the polynomial baseline, 1/eps1 otherwise unused
  double k = 1.0;          // k1 (q = 1) or k2 (q > 1)
  double eps1 = 1.0;
  double t0 = 0.0;
  double energy0 = 1.0;
};

/// Envelope predicted by the decay estimates. With `baseline` the
/// C E(0) (1+t)^{-2/(q+1)} form is returned; otherwise the refined G1 (q = 1)
/// or G2 (q > 1) form.
DecayEnvelope predicted_envelope(const Kernel& kernel, std::shared_ptr<const ConvexityData> cx, double q,
                                 const EnvelopeConstants& constants, bool baseline = false);

}  // namespace viscowave
