#pragma once

// Error analysis for Markov chain time series: integrated autocorrelation
// time with automatic windowing, binning, and jackknife over bins. Also the
// loop-table diagnostics built on top (effective potential, Creutz ratios).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lgt/group.hpp"

namespace lgt {

inline constexpr int kMinSeriesLength = 32;
inline constexpr double kWindowFactor = 6.0;
inline constexpr int kTargetBins = 64;
inline constexpr int kMinHealthyBins = 16;

struct EstimatorResult {
  Complex mean{0.0, 0.0};
  double std_error = 0.0;  ///< jackknife error of the complex mean, sqrt(var re + var im)
  double abs_mean = 0.0;
  double abs_stderr = 0.0;  ///< jackknife error of |mean|
  int n = 0;
  int bins = 0;
  int bin_size = 0;
  double tau_int = 0.5;
  int window = 0;
  bool warning = false;  ///< too few bins for the autocorrelation time, or window never closed
};

struct TauEstimate {
  double tau = 0.5;
  int window = 0;
  bool converged = true;
};

/// tau_int = 1/2 + sum_{t=1}^{W} rho(t), with W the first window satisfying
/// W >= c tau_int(W). rho uses Re[(x_s - m) conj(x_{s+t} - m)].
inline TauEstimate integrated_autocorrelation(std::span<const Complex> x, double c = kWindowFactor) {
  const std::size_t n = x.size();
  Complex m(0.0, 0.0);
  for (const Complex& v : x) m += v;
  m /= static_cast<double>(n);
  auto gamma = [&](std::size_t t) {
    double s = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) s += ((x[i] - m) * std::conj(x[i + t] - m)).real();
    return s / static_cast<double>(n - t);
  };
  const double g0 = gamma(0);
  if (!(g0 > 0.0)) return {0.5, 0, true};
  double tau = 0.5;
  const std::size_t wmax = n / 2;
  for (std::size_t w = 1; w <= wmax; ++w) {
    tau += gamma(w) / g0;
    if (tau < 0.5) tau = 0.5;  // noise-dominated negative sums
    if (static_cast<double>(w) >= c * tau) return {tau, static_cast<int>(w), true};
  }
  return {tau, static_cast<int>(wmax), false};
}

/// Bin size: at least 2 tau_int, and large enough that there are at most
/// kTargetBins bins.
inline int choose_bin_size(std::size_t n, double tau) {
  const int by_tau = static_cast<int>(std::ceil(2.0 * tau));
  const int by_count = static_cast<int>((n + kTargetBins - 1) / kTargetBins);
  return std::max({1, by_tau, by_count});
}

struct JackknifeValue {
  double value = 0.0;
  double error = 0.0;
};

/// Jackknife over bins for a function of the means of several equally long
/// series. The value is f at the full-sample means.
inline JackknifeValue jackknife(std::span<const std::span<const Complex>> series, int bin_size,
                                const std::function<double(std::span<const Complex>)>& f) {
  require(!series.empty(), "jackknife needs at least one series");
  const std::size_t n = series[0].size();
  for (const auto& s : series) require(s.size() == n, "jackknife series must have equal lengths");
  require(bin_size >= 1, "bin size must be >= 1");
  const std::size_t bins = n / static_cast<std::size_t>(bin_size);
  if (bins < 2) throw ConfigError("series too short for jackknife: " + std::to_string(bins) + " bins");

  const std::size_t k = series.size();
  std::vector<Complex> bin_sum(bins * k, Complex(0.0, 0.0));
  std::vector<Complex> total(k, Complex(0.0, 0.0));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t b = 0; b < bins; ++b) {
      Complex s(0.0, 0.0);
      for (std::size_t i = b * bin_size; i < (b + 1) * bin_size; ++i) s += series[j][i];
      bin_sum[b * k + j] = s;
      total[j] += s;
    }
  const double used = static_cast<double>(bins * bin_size);
  std::vector<Complex> means(k);
  for (std::size_t j = 0; j < k; ++j) means[j] = total[j] / used;
  JackknifeValue out;
  out.value = f(means);

  std::vector<double> fi(bins);
  std::vector<Complex> loo(k);
  double fbar = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    for (std::size_t j = 0; j < k; ++j) loo[j] = (total[j] - bin_sum[b * k + j]) / (used - bin_size);
    fi[b] = f(loo);
    fbar += fi[b];
  }
  fbar /= static_cast<double>(bins);
  double var = 0.0;
  for (double v : fi) var += (v - fbar) * (v - fbar);
  out.error = std::sqrt(var * (static_cast<double>(bins) - 1.0) / static_cast<double>(bins));
  return out;
}

inline JackknifeValue jackknife(std::span<const Complex> series, int bin_size,
                                const std::function<double(std::span<const Complex>)>& f) {
  const std::span<const Complex> one[] = {series};
  return jackknife(std::span<const std::span<const Complex>>(one), bin_size, f);
}

/// Mean, tau_int, binned jackknife error of the mean and of |mean|.
inline EstimatorResult estimate(std::span<const Complex> series) {
  if (series.size() < static_cast<std::size_t>(kMinSeriesLength))
    throw ConfigError("series too short for error analysis: " + std::to_string(series.size()) + " < " +
                      std::to_string(kMinSeriesLength));
  EstimatorResult r;
  r.n = static_cast<int>(series.size());
  const TauEstimate t = integrated_autocorrelation(series);
  r.tau_int = t.tau;
  r.window = t.window;
  r.bin_size = choose_bin_size(series.size(), t.tau);
  r.bins = r.n / r.bin_size;

  Complex m(0.0, 0.0);
  for (const Complex& v : series) m += v;
  r.mean = m / static_cast<double>(r.n);
  r.abs_mean = std::abs(r.mean);

  if (r.bins < 2) {
    r.warning = true;
    r.std_error = std::numeric_limits<double>::infinity();
    r.abs_stderr = r.std_error;
    return r;
  }
  const auto re = jackknife(series, r.bin_size, [](std::span<const Complex> v) { return v[0].real(); });
  const auto im = jackknife(series, r.bin_size, [](std::span<const Complex> v) { return v[0].imag(); });
  const auto ab = jackknife(series, r.bin_size, [](std::span<const Complex> v) { return std::abs(v[0]); });
  r.std_error = std::hypot(re.error, im.error);
  r.abs_stderr = ab.error;
  r.warning = !t.converged || r.bins < kMinHealthyBins || r.bin_size < 2.0 * r.tau_int;
  return r;
}

inline EstimatorResult estimate(std::span<const double> series) {
  std::vector<Complex> c(series.begin(), series.end());
  return estimate(std::span<const Complex>(c));
}

// ---------------------------------------------------------------------------
// Loop tables

/// One |<W(R, T)>| / n entry. Censored entries carry only an upper bound.
struct LoopEntry {
  double value = 0.0;  ///< normalized |<W>| / n (central value)
  double error = 0.0;
  bool censored = false;
  double upper = 0.0;  ///< value + 3 error when censored
};

/// Keys are (R, T) with R <= T; lookups of (R, T) with R > T use (T, R).
using LoopTable = std::map<std::pair<int, int>, LoopEntry>;

inline std::optional<LoopEntry> lookup(const LoopTable& t, int R, int T) {
  const auto it = t.find({std::min(R, T), std::max(R, T)});
  if (it == t.end()) return std::nullopt;
  return it->second;
}

/// Censoring rule: |mean| < 3 stderr reports the upper bound |mean| + 3 stderr.
inline LoopEntry make_loop_entry(double abs_mean, double std_error, double n) {
  LoopEntry e;
  e.value = abs_mean / n;
  e.error = std_error / n;
  e.censored = abs_mean < 3.0 * std_error;
  e.upper = (abs_mean + 3.0 * std_error) / n;
  return e;
}

struct PotentialEstimate {
  int R = 0;
  int T_used = 0;
  double V = 0.0;  ///< -ln(|<W>|/n)/T at the largest T (a lower bound when censored)
  double error = 0.0;
  bool censored = false;
  double slope = 0.0;  ///< weighted fit of -ln(|<W>|/n) against T over uncensored T
  double slope_error = 0.0;
  bool slope_valid = false;
};

inline std::vector<PotentialEstimate> effective_potential(const LoopTable& table) {
  std::map<int, std::vector<std::pair<int, LoopEntry>>> by_r;
  for (const auto& [key, e] : table) by_r[key.first].push_back({key.second, e});
  std::vector<PotentialEstimate> out;
  for (auto& [R, rows] : by_r) {
    if (rows.size() < 2) continue;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    PotentialEstimate p;
    p.R = R;
    const auto& [tmax, last] = rows.back();
    p.T_used = tmax;
    p.censored = last.censored || last.value <= 0.0;
    if (p.censored) {
      p.V = -std::log(std::min(1.0, last.upper)) / tmax;
      p.error = 0.0;
    } else {
      p.V = -std::log(last.value) / tmax;
      p.error = last.error / (last.value * tmax);
    }
    // Weighted least squares y = a + V T over uncensored points.
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (const auto& [T, e] : rows) {
      if (e.censored || e.value <= 0.0) continue;
      const double y = -std::log(e.value);
      const double sig = e.error > 0.0 ? e.error / e.value : 1e-12;
      const double w = 1.0 / (sig * sig);
      sw += w;
      sx += w * T;
      sy += w * y;
      sxx += w * T * T;
      sxy += w * T * y;
      ++used;
    }
    if (used >= 2) {
      const double det = sw * sxx - sx * sx;
      if (det > 0.0) {
        p.slope = (sw * sxy - sx * sy) / det;
        p.slope_error = std::sqrt(sw / det);
        p.slope_valid = true;
      }
    }
    out.push_back(p);
  }
  return out;
}

struct CreutzEstimate {
  int R = 0, T = 0;
  double chi = 0.0;
  double error = 0.0;
  bool censored = true;
};

/// chi(R, T) = -ln[ W(R,T) W(R-1,T-1) / (W(R,T-1) W(R-1,T)) ], from |<W>|.
inline CreutzEstimate creutz_ratio(const LoopTable& table, int R, int T) {
  require(R >= 2 && T >= 2, "Creutz ratios need R, T >= 2");
  CreutzEstimate c;
  c.R = R;
  c.T = T;
  const auto a = lookup(table, R, T), b = lookup(table, R - 1, T - 1), x = lookup(table, R, T - 1), y = lookup(table, R - 1, T);
  if (!a || !b || !x || !y) return c;
  for (const auto& e : {*a, *b, *x, *y})
    if (e.censored || e.value <= 0.0) return c;
  c.censored = false;
  c.chi = -(std::log(a->value) + std::log(b->value) - std::log(x->value) - std::log(y->value));
  double v = 0.0;
  for (const auto& e : {*a, *b, *x, *y}) v += (e.error / e.value) * (e.error / e.value);
  c.error = std::sqrt(v);
  return c;
}

}  // namespace lgt
