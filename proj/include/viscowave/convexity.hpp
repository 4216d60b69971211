#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "viscowave/kernel.hpp"

namespace viscowave {

/// The pair (xi, G) of the convexity condition f'(t) <= -xi(t) G(f(t)).
///
/// `shape` is G on (0, upper], upper = f(0). When G and its first two
/// derivatives are finite at `upper`, `extension` holds (g0, g1, g2) and G
/// continues past `upper` as the C^2 quadratic built from them.
struct ConvexityData {
  std::string label;
  std::function<double(double)> rate;                 // xi
  std::function<double(double, double)> rate_integral;  // integral of xi over [a, b]
  std::function<double(double)> shape;                // G
  std::function<double(double)> shape_d1;             // G'
  std::function<double(double)> shape_d2;             // G''
  double upper = 0.0;
  std::optional<std::array<double, 3>> extension;
};

ConvexityData make_convexity(std::string label, std::function<double(double)> rate,
                             std::function<double(double, double)> rate_integral,
                             std::function<double(double)> shape, std::function<double(double)> shape_d1,
                             std::function<double(double)> shape_d2, double upper);

/// xi = rate (constant), G(t) = t.
ConvexityData linear_convexity(double rate, double upper);
/// xi = 1, G(t) = beta t / ln(alpha/t)^(1/beta - 1) on (0, alpha].
ConvexityData stretched_convexity(double alpha, double beta);
/// xi = 1, G(t) = scale * t^exponent.
ConvexityData power_convexity(double exponent, double upper, double scale = 1.0);

/// G with the quadratic extension beyond `upper`; 0 for t <= 0.
double shape_value(const ConvexityData& cx, double t);
/// G' with the extension beyond `upper`.
double shape_slope(const ConvexityData& cx, double t);
/// The quadratic extension itself; requires t > upper and a finite extension.
double extend_shape(const ConvexityData& cx, double t);
/// Inverse of the (extended) G. Sets `saturated` when y lies beyond the range of G.
double shape_inverse(const ConvexityData& cx, double y, bool* saturated = nullptr);

struct ConvexityCheck {
  double max_violation = 0.0;  // max over the grid of f'(t) + xi(t) G(f(t))
  double at_time = 0.0;
  int points = 0;
  bool pass = false;
};

/// Pointwise check of f'(t) + xi(t) G(f(t)) <= tol over a grid in (0, T].
ConvexityCheck check_convexity_condition(const Kernel& kernel, const ConvexityData& cx,
                                         const std::vector<double>& grid, double tol = 1e-10);

struct ShapeValidation {
  bool increasing = true;   // G' > 0
  bool convex = true;       // G'' >= 0
  bool extension_c2 = true;  // value/slope/curvature match at `upper`
  double extension_mismatch = 0.0;
  bool ok() const { return increasing && convex && extension_c2; }
};

ShapeValidation validate_shape(const ConvexityData& cx, int points = 400);

/// Lower end of the domain on which G1 is evaluated.
double g1_floor(const ConvexityData& cx);

/// G1(t) = integral over [t, f(0)] of 1/(s G'(s)) ds, by adaptive quadrature.
double g1_map(const ConvexityData& cx, double t);

struct InverseResult {
  double value = 0.0;
  bool saturated = false;
};

/// Inverse of the decreasing map G1; saturates at g1_floor.
InverseResult g1_inverse(const ConvexityData& cx, double y);

/// G2(t) = t G'(eps1 t) with G' extended past f(0).
double g2_map(const ConvexityData& cx, double eps1, double t);
double g2_inverse(const ConvexityData& cx, double eps1, double y);

/// Tabulated G1 for repeated evaluation (envelope fitting). Cumulative
/// integrals are stored on a logarithmic grid between g1_floor and f(0).
class G1Table {
 public:
  explicit G1Table(const ConvexityData& cx, int segments = 2048);

  double operator()(double t) const;
  InverseResult inverse(double y) const;
  double max_value() const { return cumulative_.back(); }

 private:
  double partial(std::size_t k, double sigma) const;

  const ConvexityData* cx_;
  std::vector<double> sigma_;       // descending: sigma_[0] = ln f(0)
  std::vector<double> cumulative_;  // G1 at exp(sigma_[k])
};

}  // namespace viscowave
