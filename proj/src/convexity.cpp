#include "viscowave/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "viscowave/errors.hpp"
#include "viscowave/quadrature.hpp"

namespace viscowave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest x in [lo, hi] with fn(x) >= target for nondecreasing fn, by bisection
// until the bracket stops shrinking in floating point.
template <class Fn>
double bisect_increasing(Fn&& fn, double lo, double hi, double target) {
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fn(mid) >= target) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

double g1_integrand(const ConvexityData& cx, double sigma) {
  return 1.0 / cx.shape_d1(std::exp(sigma));
}

}  // namespace

ConvexityData make_convexity(std::string label, std::function<double(double)> rate,
                             std::function<double(double, double)> rate_integral,
                             std::function<double(double)> shape, std::function<double(double)> shape_d1,
                             std::function<double(double)> shape_d2, double upper) {
  if (!(upper > 0.0)) throw DomainError("convexity data needs f(0) > 0");
  ConvexityData cx;
  cx.label = std::move(label);
  cx.rate = std::move(rate);
  if (rate_integral) {
    cx.rate_integral = std::move(rate_integral);
  } else {
    cx.rate_integral = [r = cx.rate](double a, double b) {
      return quad::integrate(r, a, b, 1e-14, 1e-12).value;
    };
  }
  cx.shape = std::move(shape);
  cx.shape_d1 = std::move(shape_d1);
  cx.shape_d2 = std::move(shape_d2);
  cx.upper = upper;
  const double g0 = cx.shape(upper);
  const double g1 = cx.shape_d1(upper);
  const double g2 = cx.shape_d2(upper);
  if (std::isfinite(g0) && std::isfinite(g1) && std::isfinite(g2))
    cx.extension = std::array<double, 3>{g0, g1, g2};
  return cx;
}

ConvexityData linear_convexity(double rate, double upper) {
  return make_convexity(
      "linear", [rate](double) { return rate; }, [rate](double a, double b) { return rate * (b - a); },
      [](double t) { return t; }, [](double) { return 1.0; }, [](double) { return 0.0; }, upper);
}

ConvexityData stretched_convexity(double alpha, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("stretched convexity needs 0 < beta < 1");
  auto log_ratio = [alpha](double t) { return std::log(alpha / t); };
  return make_convexity(
      "stretched", [](double) { return 1.0; }, [](double a, double b) { return b - a; },
      [=](double t) { return beta * t * std::pow(log_ratio(t), 1.0 - 1.0 / beta); },
      [=](double t) {
        const double L = log_ratio(t);
        return (beta * L + 1.0 - beta) * std::pow(L, -1.0 / beta);
      },
      [=](double t) {
        const double L = log_ratio(t);
        return (1.0 - beta) * (L + 1.0 / beta) / (t * std::pow(L, 1.0 / beta + 1.0));
      },
      alpha);
}

ConvexityData power_convexity(double exponent, double upper, double scale) {
  if (!(exponent > 1.0)) throw DomainError("power convexity needs exponent > 1");
  return make_convexity(
      "power", [](double) { return 1.0; }, [](double a, double b) { return b - a; },
      [=](double t) { return scale * std::pow(t, exponent); },
      [=](double t) { return scale * exponent * std::pow(t, exponent - 1.0); },
      [=](double t) { return scale * exponent * (exponent - 1.0) * std::pow(t, exponent - 2.0); }, upper);
}

double extend_shape(const ConvexityData& cx, double t) {
  if (!cx.extension) throw DomainError("G has no finite extension past f(0)");
  if (!(t > cx.upper)) throw DomainError("extension is defined only for t > f(0)");
  const auto [g0, g1, g2] = *cx.extension;
  const double f0 = cx.upper;
  return (g0 - g1 * f0 + 0.5 * g2 * f0 * f0) + (g1 - g2 * f0) * t + 0.5 * g2 * t * t;
}

double shape_value(const ConvexityData& cx, double t) {
  if (t <= 0.0) return 0.0;
  if (t <= cx.upper) return cx.shape(t);
  return cx.extension ? extend_shape(cx, t) : kInf;
}

double shape_slope(const ConvexityData& cx, double t) {
  if (t <= cx.upper) return cx.shape_d1(t);
  if (!cx.extension) return kInf;
  const auto [g0, g1, g2] = *cx.extension;
  (void)g0;
  return g1 + g2 * (t - cx.upper);
}

double shape_inverse(const ConvexityData& cx, double y, bool* saturated) {
  if (saturated) *saturated = false;
  if (!(y > 0.0)) return 0.0;
  const double top = cx.shape(cx.upper);
  if (y > top) {
    if (!cx.extension) {
      if (std::isfinite(top)) {
        if (saturated) *saturated = true;
        return cx.upper;
      }
    } else {
      const auto [g0, g1, g2] = *cx.extension;
      const double f0 = cx.upper;
      const double c = g0 - g1 * f0 + 0.5 * g2 * f0 * f0 - y;
      const double b = g1 - g2 * f0;
      if (g2 == 0.0) return -c / b;
      const double a = 0.5 * g2;
      const double disc = std::sqrt(b * b - 4.0 * a * c);
      // larger root, in the cancellation-free form
      return b >= 0.0 ? (-2.0 * c) / (b + disc) : (-b + disc) / (2.0 * a);
    }
  }
  const double sigma = bisect_increasing(
      [&cx](double s) {
        const double v = cx.shape(std::exp(s));
        return std::isnan(v) ? kInf : v;
      },
      std::log(1e-300), std::log(cx.upper), y);
  return std::exp(sigma);
}

ConvexityCheck check_convexity_condition(const Kernel& kernel, const ConvexityData& cx,
                                         const std::vector<double>& grid, double tol) {
  ConvexityCheck out;
  out.max_violation = -kInf;
  for (double t : grid) {
    if (!(t > 0.0)) throw DomainError("convexity grid must lie in (0, T]");
    const double f = kernel_value(kernel, t);
    const double violation = kernel_slope(kernel, t) + cx.rate(t) * shape_value(cx, f);
    ++out.points;
    if (violation > out.max_violation || std::isnan(violation)) {
      out.max_violation = std::isnan(violation) ? kInf : violation;
      out.at_time = t;
    }
  }
  out.pass = out.points > 0 && out.max_violation <= tol;
  return out;
}

ShapeValidation validate_shape(const ConvexityData& cx, int points) {
  ShapeValidation out;
  for (int i = 1; i <= points; ++i) {
    const double t = cx.upper * i / points;
    const double d1 = cx.shape_d1(t);
    const double d2 = cx.shape_d2(t);
    if (!(d1 > 0.0)) out.increasing = false;
    if (!(d2 >= -1e-12 * std::max(1.0, std::abs(d1)))) out.convex = false;
  }
  if (cx.extension) {
    const double f0 = cx.upper;
    const double eps = 1e-7 * f0;
    const auto [g0, g1, g2] = *cx.extension;
    const double value = extend_shape(cx, f0 * (1.0 + 1e-15) + 1e-300);
    const double slope = (extend_shape(cx, f0 + 2 * eps) - extend_shape(cx, f0 + eps)) / eps;
    const double expected_slope = g1 + 1.5 * g2 * eps;
    out.extension_mismatch = std::max(std::abs(value - g0) / std::max(1.0, std::abs(g0)),
                                      std::abs(slope - expected_slope) / std::max(1.0, std::abs(g1)));
    out.extension_c2 = out.extension_mismatch < 1e-6;
  }
  return out;
}

double g1_floor(const ConvexityData& cx) { return 1e-14 * cx.upper; }

double g1_map(const ConvexityData& cx, double t) {
  if (!(t > 0.0 && t <= cx.upper)) throw DomainError("G1 is defined on (0, f(0)]");
  if (t == cx.upper) return 0.0;
  auto r = quad::integrate([&cx](double s) { return g1_integrand(cx, s); }, std::log(t), std::log(cx.upper),
                           1e-15, 1e-13);
  return r.value;
}

InverseResult g1_inverse(const ConvexityData& cx, double y) {
  if (!(y >= 0.0)) throw DomainError("G1 inverse needs y >= 0");
  if (y == 0.0) return {cx.upper, false};
  const double floor = g1_floor(cx);
  const double top = g1_map(cx, floor);
  if (y >= top) return {floor, true};
  // G1 decreases in sigma = ln t; bisect on -G1 which increases.
  const double sigma = bisect_increasing([&cx, y](double s) { return -g1_map(cx, std::exp(s)); },
                                         std::log(floor), std::log(cx.upper), -y);
  return {std::exp(sigma), false};
}

double g2_map(const ConvexityData& cx, double eps1, double t) {
  if (!(eps1 > 0.0)) throw DomainError("G2 needs eps1 > 0");
  if (!(t >= 0.0)) throw DomainError("G2 is defined for t >= 0");
  if (t == 0.0) return 0.0;
  return t * shape_slope(cx, eps1 * t);
}

double g2_inverse(const ConvexityData& cx, double eps1, double y) {
  if (!(y >= 0.0)) throw DomainError("G2 inverse needs y >= 0");
  if (y == 0.0) return 0.0;
  double hi = 1.0;
  while (g2_map(cx, eps1, hi) < y) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("G2 inverse: bracket overflow");
  }
  double lo = hi;
  while (lo > 1e-300 && g2_map(cx, eps1, lo) >= y) lo *= 0.5;
  return bisect_increasing([&](double t) { return g2_map(cx, eps1, t); }, lo, hi, y);
}

G1Table::G1Table(const ConvexityData& cx, int segments) : cx_(&cx) {
  const double top = std::log(cx.upper);
  const double bottom = std::log(g1_floor(cx));
  sigma_.resize(static_cast<std::size_t>(segments) + 1);
  cumulative_.resize(sigma_.size());
  for (int k = 0; k <= segments; ++k) sigma_[static_cast<std::size_t>(k)] = top + (bottom - top) * k / segments;
  cumulative_[0] = 0.0;
  for (std::size_t k = 1; k < sigma_.size(); ++k) {
    auto r = quad::integrate([&cx](double s) { return g1_integrand(cx, s); }, sigma_[k], sigma_[k - 1], 1e-16,
                             1e-14);
    cumulative_[k] = cumulative_[k - 1] + r.value;
  }
}

double G1Table::partial(std::size_t k, double sigma) const {
  // G1 at exp(sigma) for sigma in [sigma_[k+1], sigma_[k]].
  if (sigma >= sigma_[k]) return cumulative_[k];
  auto r = quad::integrate([this](double s) { return g1_integrand(*cx_, s); }, sigma, sigma_[k], 1e-16, 1e-14);
  return cumulative_[k] + r.value;
}

double G1Table::operator()(double t) const {
  if (!(t > 0.0 && t <= cx_->upper)) throw DomainError("G1 is defined on (0, f(0)]");
  const double sigma = std::log(t);
  if (sigma <= sigma_.back()) return g1_map(*cx_, t);
  // sigma_ is descending; locate k with sigma_[k+1] <= sigma <= sigma_[k]
  auto it = std::lower_bound(sigma_.begin(), sigma_.end(), sigma, std::greater<>());
  std::size_t k = static_cast<std::size_t>(it - sigma_.begin());
  if (k > 0) --k;
  return partial(k, sigma);
}

InverseResult G1Table::inverse(double y) const {
  if (!(y >= 0.0)) throw DomainError("G1 inverse needs y >= 0");
  if (y == 0.0) return {cx_->upper, false};
  if (y >= cumulative_.back()) return {std::exp(sigma_.back()), true};
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), y);
  const std::size_t k = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  // Safeguarded Newton on sigma in [sigma_[k+1], sigma_[k]]; dG1/dsigma = -1/G'(e^sigma).
  double lo = sigma_[k + 1];
  double hi = sigma_[k];
  double sigma = hi + (lo - hi) * (y - cumulative_[k]) / (cumulative_[k + 1] - cumulative_[k]);
  for (int it_count = 0; it_count < 60; ++it_count) {
    const double residual = partial(k, sigma) - y;
    if (residual == 0.0) break;
    if (residual > 0.0) lo = sigma;  // G1 too large: t too small
    else hi = sigma;
    const double slope = -g1_integrand(*cx_, sigma);
    double next = sigma - residual / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - sigma) <= 1e-15 * std::max(1.0, std::abs(sigma))) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return {std::exp(sigma), false};
}

}  // namespace viscowave
