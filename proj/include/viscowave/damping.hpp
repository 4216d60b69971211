#pragma once

#include "viscowave/problem.hpp"

namespace viscowave {

/// The unique v with v + c h(v) = r (c >= 0). Safeguarded Newton inside the
/// bracket [min(0,r), max(0,r)], falling back to bisection.
double solve_damping_pointwise(double r, double c, const DampingSpec& damping);

}  // namespace viscowave
