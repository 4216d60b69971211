#pragma once

#include "viscowave/energy.hpp"
#include "viscowave/problem.hpp"

namespace viscowave {

/// Advances the configured problem to t_end, recording every record_stride
/// steps. Runs one step past the last record so the centered energy rate is
/// available there. Blow-up ends the trace early with the flag set.
EnergyTrace run(const ProblemConfig& cfg);

}  // namespace viscowave
