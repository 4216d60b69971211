#include "viscowave/damping.hpp"

#include <cmath>

namespace viscowave {

double DampingSpec::operator()(double s) const {
  const double mag = std::abs(s);
  if (mag > 1.0) return scale * s;
  if (q == 1.0) return scale * s;
  return scale * s * std::pow(mag, q - 1.0);
}

double DampingSpec::derivative(double s) const {
  const double mag = std::abs(s);
  if (mag > 1.0 || q == 1.0) return scale;
  return scale * q * std::pow(mag, q - 1.0);
}

double solve_damping_pointwise(double r, double c, const DampingSpec& damping) {
  if (c == 0.0 || r == 0.0) return r;
  if (damping.q == 1.0) return r / (1.0 + c * damping.scale);
  // phi(v) = v + c h(v) - r is strictly increasing with its root between 0 and r.
  auto phi = [&](double v) { return v + c * damping(v) - r; };
  double lo = std::min(0.0, r);
  double hi = std::max(0.0, r);
  // Linear-branch guess, valid whenever the root sits beyond |v| = 1.
  double v = r / (1.0 + c * damping.scale);
  if (std::abs(v) <= 1.0) v = r / (1.0 + c * damping.derivative(r));
  for (int it = 0; it < 200; ++it) {
    const double f = phi(v);
    if (f == 0.0) return v;
    if (f > 0.0) hi = v;
    else lo = v;
    const double slope = 1.0 + c * damping.derivative(v);
    double next = v - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == v || next == lo || next == hi) {
      // bracket exhausted in floating point; pick the better endpoint
      const double flo = std::abs(phi(lo));
      const double fhi = std::abs(phi(hi));
      const double fv = std::abs(f);
      if (fv <= flo && fv <= fhi) return v;
      return flo < fhi ? lo : hi;
    }
    v = next;
  }
  return v;
}

}  // namespace viscowave
