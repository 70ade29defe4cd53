#pragma once

// Closed forms for the von Mises family on U(1) and the empirical constants
// certifying the anti-concentration bounds:
//
//   spread(w)      = E|z1 - z2|^2 = 2 (1 - r(|w|)^2)  >=  C  min{1, 1/|w|}
//   1 - |E(xi)|    = 1 - r(|w|)                       >=  C' min{1, 1/|w|}

#include <cmath>
#include <functional>
#include <vector>

#include "lgt/group.hpp"
#include "lgt/special.hpp"

namespace lgt {

/// Density on U(1) proportional to exp(Re(z conj(w))): concentration |w|,
/// mean direction arg w.
struct VonMisesSpec {
  Complex w{0.0, 0.0};
  double kappa() const { return std::abs(w); }
};

inline Complex vm_mean(const VonMisesSpec& s) {
  const double k = s.kappa();
  if (k == 0.0) return {0.0, 0.0};
  return (s.w / k) * bessel_ratio(k);
}

inline double vm_spread(const VonMisesSpec& s) {
  const double r = bessel_ratio(s.kappa());
  return 2.0 * (1.0 - r) * (1.0 + r);
}

inline double spread_from_ratio(double r) { return 2.0 * (1.0 - r) * (1.0 + r); }

inline double min_one_inverse(double kappa) { return kappa <= 1.0 ? 1.0 : 1.0 / kappa; }

/// n log-spaced points spanning [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int n) {
  require(lo > 0.0 && hi > lo && n >= 2, "log grid needs 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

struct GridInfimum {
  double value = 0.0;
  double at_kappa = 0.0;
};

/// inf over the grid of ratio(kappa, r(kappa)); r values may be supplied
/// (e.g. from a precomputed table) or computed.
inline GridInfimum grid_infimum(const std::vector<double>& kappas, const std::vector<double>& ratios,
                                const std::function<double(double, double)>& ratio) {
  require(kappas.size() == ratios.size() && !kappas.empty(), "grid and ratio table must match");
  GridInfimum inf{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    const double v = ratio(kappas[i], ratios[i]);
    if (v < inf.value) inf = {v, kappas[i]};
  }
  return inf;
}

inline double lemma1_ratio(double kappa, double r) { return spread_from_ratio(r) / min_one_inverse(kappa); }
inline double corollary_ratio(double kappa, double r) { return (1.0 - r) / min_one_inverse(kappa); }

inline std::vector<double> ratio_table(const std::vector<double>& kappas) {
  std::vector<double> r;
  r.reserve(kappas.size());
  for (double k : kappas) r.push_back(bessel_ratio(k));
  return r;
}

/// inf_kappa spread(kappa) / min{1, 1/kappa}.
inline GridInfimum lemma1_empirical_constant(const std::vector<double>& kappas) {
  return grid_infimum(kappas, ratio_table(kappas), lemma1_ratio);
}

/// inf_kappa (1 - r(kappa)) / min{1, 1/kappa}.
inline GridInfimum corollary_empirical_constant(const std::vector<double>& kappas) {
  return grid_infimum(kappas, ratio_table(kappas), corollary_ratio);
}

/// Exact <W> (n = 1) for a 2D U(1) free-boundary box: plaquettes decouple, so
/// an R x T loop gives r(beta)^{RT}.
inline double exact_2d_u1_wilson(double beta, int R, int T) {
  require(beta >= 0.0, "beta must be >= 0");
  require(R >= 1 && T >= 1, "loop sides must be >= 1");
  return std::pow(bessel_ratio(beta), static_cast<double>(R) * T);
}

}  // namespace lgt
