#include <doctest.h>

#include <cmath>
#include <functional>

#include "viscowave/decay.hpp"
#include "viscowave/errors.hpp"

using namespace viscowave;

namespace {

DecaySeries sample(const std::function<double(double)>& e, double t0, double t1, int points) {
  DecaySeries s;
  for (int i = 0; i < points; ++i) {
    const double t = t0 + (t1 - t0) * i / (points - 1);
    s.t.push_back(t);
    s.E.push_back(e(t));
  }
  return s;
}

}  // namespace

TEST_CASE("exponential fit recovers an exact exponential") {
  const DecaySeries s = sample([](double t) { return 2.0 * std::exp(-0.5 * t); }, 0.0, 50.0, 501);
  const ExponentialFit fit = fit_exponential(s);
  CHECK(fit.c1 == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.c2 == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(fit.r2 - 1.0) <= 1e-10);
  CHECK(select_model(fit, fit_polynomial(s)) == "exponential");
}

TEST_CASE("constant energy has no defined R^2") {
  const DecaySeries s = sample([](double) { return 0.7; }, 0.0, 10.0, 50);
  const ExponentialFit fit = fit_exponential(s);
  CHECK_FALSE(fit.r2_defined);
  CHECK(fit.c2 == 0.0);
  CHECK_FALSE(fit_polynomial(s).r2_defined);
}

TEST_CASE("polynomial fit") {
  const DecaySeries s = sample([](double t) { return 3.0 * std::pow(1.0 + t, -2.0 / 3.0); }, 0.0, 200.0, 401);
  const PolynomialFit fit = fit_polynomial(s);
  CHECK(fit.alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(fit.c == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(std::abs(fit.r2 - 1.0) <= 1e-10);
  CHECK(fit.r2 > fit_exponential(s).r2);

  const DecaySeries inv = sample([](double t) { return std::pow(t, -2.0); }, 1.0, 1000.0, 1000);
  const PolynomialFit pf = fit_polynomial(inv);
  CHECK(pf.r2 > fit_exponential(inv).r2);
  CHECK(pf.alpha == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(select_model(fit_exponential(inv), pf) == "polynomial");
}

TEST_CASE("stretched fit") {
  const DecaySeries s = sample([](double t) { return 0.4 * std::exp(-1.2 * std::sqrt(t)); }, 0.0, 100.0, 400);
  const StretchedFit fixed = fit_stretched(s, 0.5);
  CHECK(fixed.rate == doctest::Approx(1.2).epsilon(1e-10));
  CHECK(fixed.c == doctest::Approx(0.4).epsilon(1e-10));
  const StretchedFit free = fit_stretched_free(s);
  CHECK(free.beta == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("fits respect shifting and scaling") {
  const DecaySeries s = sample([](double t) { return 2.0 * std::exp(-0.3 * t) * (1.0 + 0.1 * std::sin(t)); }, 0.0, 40.0, 400);
  DecaySeries scaled = s, shifted = s;
  for (double& e : scaled.E) e *= 5.0;
  for (double& t : shifted.t) t += 3.0;
  const ExponentialFit base = fit_exponential(s);
  const ExponentialFit sc = fit_exponential(scaled);
  const ExponentialFit sh = fit_exponential(shifted);
  CHECK(std::abs(sc.c2 - base.c2) <= 1e-12);
  CHECK(sc.c1 == doctest::Approx(5.0 * base.c1).epsilon(1e-12));
  CHECK(std::abs(sc.r2 - base.r2) <= 1e-12);
  CHECK(std::abs(sh.c2 - base.c2) <= 1e-12);
  CHECK(sh.c1 == doctest::Approx(base.c1 * std::exp(3.0 * base.c2)).epsilon(1e-12));
  CHECK(std::abs(sh.r2 - base.r2) <= 1e-12);
}

TEST_CASE("envelope checks") {
  const DecaySeries s = sample([](double t) { return 2.0 * std::exp(-0.5 * t); }, 0.0, 50.0, 501);
  const Window tail = tail_window(s, 0.5);
  CHECK(tail.end == s.size());
  CHECK(tail.size() >= 250);
  const auto [fit, check] = split_window(tail);
  CHECK(fit.end == check.begin);

  DecayEnvelope env = fit_exponential_envelope(s, fit);
  CHECK(env.rate == doctest::Approx(0.5).epsilon(1e-10));
  const EnvelopeVerdict ok = envelope_check(s, env, check);
  CHECK(ok.pass);
  CHECK(ok.sup_ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ok.checked == check.size());

  env.amplitude *= 0.5;
  const EnvelopeVerdict halved = envelope_check(s, env, check);
  CHECK_FALSE(halved.pass);
  CHECK(halved.sup_ratio == doctest::Approx(2.0).epsilon(1e-9));

  const DecaySeries p = sample([](double t) { return std::pow(1.0 + t, -0.5); }, 0.0, 100.0, 300);
  const auto [pfit, pcheck] = split_window(tail_window(p, 0.5));
  const EnvelopeVerdict poly = envelope_check(p, fit_polynomial_envelope(p, pfit, 0.5), pcheck);
  CHECK(poly.pass);
  CHECK(poly.sup_ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("decay of the integral increments") {
  const DecaySeries s = sample([](double t) { return std::exp(-t); }, 0.0, 8.0, 8001);
  const IntegralCheck c = integral_decay_check(s, 1.0);
  CHECK(c.I_quarter == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-6));
  CHECK(c.ratio == doctest::Approx((std::exp(-4.0) - std::exp(-8.0)) / (std::exp(-2.0) - std::exp(-4.0))).epsilon(1e-5));
  CHECK(c.decreasing);
  CHECK_FALSE(c.borderline);

  const DecaySeries q2 = sample([](double t) { return std::exp(-t); }, 0.0, 8.0, 8001);
  const IntegralCheck c2 = integral_decay_check(q2, 2.0);
  CHECK(c2.ratio == doctest::Approx((std::exp(-6.0) - std::exp(-12.0)) / (std::exp(-3.0) - std::exp(-6.0))).epsilon(1e-5));

  const DecaySeries zero = sample([](double) { return 0.0; }, 0.0, 8.0, 100);
  const IntegralCheck z = integral_decay_check(zero, 1.0);
  CHECK(z.increment_early == 0.0);
  CHECK(z.increment_late == 0.0);
  CHECK(z.ratio == 0.0);
  CHECK(z.decreasing);
}

TEST_CASE("too few samples") {
  const DecaySeries s = sample([](double t) { return std::exp(-t); }, 0.0, 1.0, 10);
  CHECK_THROWS_AS(fit_exponential(s), InsufficientDataError);
  CHECK_THROWS_AS(fit_polynomial(s, 0.5), InsufficientDataError);
}
