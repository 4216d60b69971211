#include "viscowave/envelope.hpp"

#include <cmath>
#include <limits>

#include "viscowave/errors.hpp"

namespace viscowave {

std::string to_string(EnvelopeModel model) {
  switch (model) {
    case EnvelopeModel::exponential: return "exponential";
    case EnvelopeModel::stretched_exponential: return "stretched-exponential";
    case EnvelopeModel::polynomial: return "polynomial";
    case EnvelopeModel::g1_implicit: return "G1-implicit";
    case EnvelopeModel::g2_implicit: return "G2-implicit";
  }
  return "unknown";
}

double DecayEnvelope::operator()(double t) const {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  switch (model) {
    case EnvelopeModel::exponential: return amplitude * std::exp(-rate * t);
    case EnvelopeModel::stretched_exponential: return amplitude * std::exp(-rate * std::pow(t, exponent));
    case EnvelopeModel::polynomial: return amplitude * std::pow(1.0 + t, -exponent);
    case EnvelopeModel::g1_implicit: {
      if (t < t0) return nan;
      const double y = rate * convexity->rate_integral(t0, t);
      const InverseResult inv = g1 ? g1->inverse(y) : g1_inverse(*convexity, y);
      if (inv.saturated) return nan;
      return amplitude * inv.value;
    }
    case EnvelopeModel::g2_implicit: {
      if (t <= t0) return nan;
      const double weight = t * convexity->rate_integral(t0, t);
      const double inner = t * g2_inverse(*convexity, eps1, rate / weight);
      return energy0 * std::pow(inner, 2.0 / (q + 1.0));
    }
  }
  return nan;
}

DecayEnvelope predicted_envelope(const Kernel& kernel, std::shared_ptr<const ConvexityData> cx, double q,
                                 const EnvelopeConstants& constants, bool baseline) {
  if (!(q >= 1.0)) throw DomainError("damping exponent q must be >= 1");
  DecayEnvelope env;
  env.q = q;
  env.energy0 = constants.energy0;
  env.t0 = constants.t0;
  if (baseline) {
    env.model = EnvelopeModel::polynomial;
    env.amplitude = constants.amplitude * constants.energy0;
    env.exponent = 2.0 / (q + 1.0);
    return env;
  }
  if (!cx) throw DomainError("refined envelope needs convexity data");
  if (std::abs(cx->upper - kernel_value(kernel, 0.0)) > 1e-12 * cx->upper)
    throw DomainError("convexity data was built for a different f(0)");
  env.convexity = std::move(cx);
  env.eps1 = constants.eps1;
  env.rate = constants.k;
  if (q == 1.0) {
    env.model = EnvelopeModel::g1_implicit;
    env.amplitude = 1.0 / constants.eps1;
  } else {
    env.model = EnvelopeModel::g2_implicit;
  }
  return env;
}

}  // namespace viscowave
