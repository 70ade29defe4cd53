#pragma once

#include <cmath>
#include <numbers>

#include "lgt/error.hpp"
#include "lgt/group.hpp"
#include "lgt/rng.hpp"

namespace lgt {

/// Exact draw from the density proportional to exp(kappa cos(theta - mean))
/// on the circle, by Best and Fisher's wrapped-Cauchy rejection scheme.
///
/// The envelope parameters are evaluated in cancellation-free form so the
/// sampler stays exact from kappa ~ 1e-300 up to kappa ~ 1e12: with
/// a = 1 + sqrt(1 + 4 kappa^2) and rho = (a - sqrt(2a)) / (2 kappa),
/// everything below is written in terms of rho and delta = 1 - rho. The
/// result is returned in (-pi, pi].
inline double sample_von_mises(double kappa, double mean, RngStream& rng) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ContractViolation("von Mises concentration must be finite and >= 0");
  if (kappa < 1e-300) return wrap_angle(mean + std::numbers::pi * (2.0 * rng.uniform() - 1.0));

  const double root = std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double a = 1.0 + root;
  const double sqrt2a = std::sqrt(2.0 * a);
  const double rho = 2.0 * kappa * a / ((root + 1.0) * (a + sqrt2a));
  const double delta = kappa < 1.0 ? 1.0 - rho : (sqrt2a - 1.0 - 1.0 / (root + 2.0 * kappa)) / (2.0 * kappa);
  const double s_minus_1 = delta * delta / (2.0 * rho);
  const double s_plus_1 = (1.0 + rho) * (1.0 + rho) / (2.0 * rho);

  double theta = 0.0;
  for (;;) {
    const double u1 = rng.uniform();
    const double half = std::cos(0.5 * std::numbers::pi * u1);
    const double one_plus_z = 2.0 * half * half;  // 1 + cos(pi u1)
    const double one_minus_z = 2.0 - one_plus_z;
    const double s_plus_z = s_minus_1 + one_plus_z;
    // w = (1 + s z)/(s + z);  y = kappa (s - w);  1 - w = (s - 1)(1 - z)/(s + z).
    const double y = kappa * s_minus_1 * (s_plus_1 / s_plus_z);
    const double one_minus_w = s_minus_1 * (one_minus_z / s_plus_z);
    const double v = rng.uniform_open();
    if (y * (2.0 - y) - v >= 0.0 || std::log(y / v) + 1.0 - y >= 0.0) {
      theta = 2.0 * std::asin(std::sqrt(std::min(1.0, 0.5 * one_minus_w)));
      break;
    }
  }
  if (rng.uniform() < 0.5) theta = -theta;
  return wrap_angle(theta + mean);
}

}  // namespace lgt
