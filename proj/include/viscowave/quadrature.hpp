#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace viscowave::quad {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

// 15-point Kronrod abscissae; odd entries are the embedded 7-point Gauss nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = r * kNodes[j];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * r, std::abs((kronrod - gauss) * r)};
}

}  // namespace detail

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
/// The interval with the largest error estimate is bisected until the
/// summed estimate meets max(abs_tol, rel_tol*|I|).
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol = 1e-14,
                 double rel_tol = 1e-12, int max_intervals = 4000) {
  Result out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gauss_kronrod15(f, a, b);
  double total = first.value;
  double error = first.error;
  heap.push(first);
  int count = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(total)) && count < max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;  // interval cannot be split further in floating point
    }
    auto left = detail::gauss_kronrod15(f, worst.a, mid);
    auto right = detail::gauss_kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed the drift of the incremental updates.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.abs_error = error;
  out.intervals = count;
  out.converged = error <= std::max(abs_tol, rel_tol * std::abs(total));
  return out;
}

/// Integral over [a, inf) through the map s = a + x/(1-x), x in [0, 1).
/// Gauss–Kronrod nodes are interior, so x = 1 is never evaluated.
template <class F>
Result integrate_to_infinity(F&& f, double a, double abs_tol = 1e-14,
                             double rel_tol = 1e-12, int max_intervals = 4000) {
  auto mapped = [&f, a](double x) {
    const double one_minus = 1.0 - x;
    const double s = a + x / one_minus;
    const double value = f(s);
    if (value == 0.0) return 0.0;
    return value / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, abs_tol, rel_tol, max_intervals);
}

}  // namespace viscowave::quad
