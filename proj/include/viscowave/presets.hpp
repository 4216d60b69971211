#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "viscowave/convexity.hpp"
#include "viscowave/decay.hpp"
#include "viscowave/kernel.hpp"

namespace viscowave {

/// A reproducible example: a run config plus the convexity pair and the
/// damping exponent whose decay envelopes it is meant to exhibit.
///
///   1  shifted-exponential kernel (0.1, 1),  xi = 1,  G(t) = t,        q = 1
///   2  stretched-exponential kernel (0.2, 0.5), xi = 1, G logarithmic,  q = 1
///   3  power-law kernel (0.05, 2),            xi = 1,  G(t) = t^{3/2},  q = 2
struct ExamplePreset {
  int id = 1;
  std::string name;
  nlohmann::json config;
  double tail_fraction = 0.5;  // fit window used by reproduce
};

ExamplePreset example_preset(int id);

/// The convexity pair used for a kernel family; null for tabulated kernels.
std::shared_ptr<const ConvexityData> default_convexity(const Kernel& kernel);

/// Fits, model selection, integral check and the generic envelopes: the
/// baseline polynomial (1+t)^{-2/(q+1)} (required) and, when the
/// exponential model is selected, the exponential envelope (required).
DecayFitReport fit_decay(const DecaySeries& s, double q, double tail_fraction = 0.5);

/// Adds the envelopes specific to an example preset.
void add_example_envelopes(DecayFitReport& report, const DecaySeries& s, int example_id, const Kernel& kernel,
                           double q);

}  // namespace viscowave
