#pragma once

// Adaptive Gauss-Kronrod quadrature and the von Mises mean resultant
// r(kappa) = I1(kappa) / I0(kappa).

#include <array>
#include <cmath>
#include <functional>

#include "lgt/error.hpp"

namespace lgt {

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GkResult {
  double value;
  double error;
};

inline GkResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kKronrodWeights[7];
  double g = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double x = h * kKronrodNodes[i];
    const double s = f(c - x) + f(c + x);
    k += kKronrodWeights[i] * s;
    if (i % 2 == 1) g += kGaussWeights[i / 2] * s;
  }
  return {k * h, std::abs((k - g) * h)};
}

inline double adaptive(const std::function<double(double)>& f, double a, double b, double tol, GkResult whole, int depth) {
  if (whole.error <= tol || depth >= 60) return whole.value;
  const double m = 0.5 * (a + b);
  const GkResult left = gauss_kronrod_15(f, a, m), right = gauss_kronrod_15(f, m, b);
  return adaptive(f, a, m, 0.5 * tol, left, depth + 1) + adaptive(f, m, b, 0.5 * tol, right, depth + 1);
}

}  // namespace detail

/// Adaptive G7-K15 quadrature to an absolute tolerance.
inline double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-12) {
  return detail::adaptive(f, a, b, abs_tol, detail::gauss_kronrod_15(f, a, b), 0);
}

/// r(kappa) = I1(kappa) / I0(kappa), the von Mises mean resultant length.
/// Power series for kappa <= 15, Gauss continued fraction up to 50, and
/// the large-argument expansion beyond.
inline double bessel_ratio(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ContractViolation("bessel_ratio needs a finite kappa >= 0");
  if (kappa == 0.0) return 0.0;
  if (kappa <= 15.0) {
    const double q = 0.25 * kappa * kappa;
    double t0 = 1.0, t1 = 1.0, s0 = 1.0, s1 = 1.0;
    for (int k = 1; k < 200; ++k) {
      t0 *= q / (static_cast<double>(k) * k);
      t1 *= q / (static_cast<double>(k) * (k + 1));
      s0 += t0;
      s1 += t1;
      if (t0 < 1e-18 * s0 && t1 < 1e-18 * s1) break;
    }
    return 0.5 * kappa * s1 / s0;
  }
  if (kappa <= 50.0) {
    // I1/I0 = 1 / (2/k + 1 / (4/k + 1 / (6/k + ...))), modified Lentz.
    constexpr double tiny = 1e-300;
    double f = 2.0 / kappa, c = f, d = 0.0;
    for (int j = 2; j < 1000000; ++j) {
      const double b = 2.0 * j / kappa;
      d = b + d;
      if (std::abs(d) < tiny) d = tiny;
      c = b + 1.0 / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double delta = c * d;
      f *= delta;
      if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / f;
  }
  // I_nu(x) ~ e^x / sqrt(2 pi x) sum_k (-1)^k a_k(nu) / x^k.
  auto series = [kappa](double nu) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 12; ++k) {
      const double odd = 2.0 * k - 1.0;
      term *= -(mu - odd * odd) / (k * 8.0 * kappa);
      sum += term;
    }
    return sum;
  };
  return series(1.0) / series(0.0);
}

/// r(kappa) by quadrature: int cos(t) e^{kappa(cos t - 1)} / int e^{kappa(cos t - 1)}
/// over [0, 2 pi]. Independent of bessel_ratio; used as its oracle.
inline double bessel_ratio_quadrature(double kappa, double abs_tol = 1e-13) {
  require(kappa >= 0.0, "kappa must be >= 0");
  const double pi = 3.14159265358979323846;
  // The integrands are even about 0; integrate [0, pi] and split at a scale
  // matched to the peak width so narrow peaks are resolved.
  const double cut = std::min(pi, 10.0 / std::sqrt(std::max(kappa, 1e-12)));
  auto z = [&](double t) { return std::exp(kappa * (std::cos(t) - 1.0)); };
  auto one_minus_c = [&](double t) {
    const double s = std::sin(0.5 * t);
    return 2.0 * s * s * z(t);
  };
  auto span = [&](const std::function<double(double)>& f) {
    return integrate(f, 0.0, cut, abs_tol) + (cut < pi ? integrate(f, cut, pi, abs_tol) : 0.0);
  };
  const double den = span(z);
  const double num = span(one_minus_c);  // int (1 - cos) z, keeps 1 - r accurate
  return 1.0 - num / den;
}

}  // namespace lgt
