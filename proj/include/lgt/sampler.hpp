#pragma once

// Markov chain updates for gauge fields and weighted XY systems, and the
// chain driver that turns them into measured time series.

#include <chrono>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "lgt/field.hpp"
#include "lgt/spin.hpp"
#include "lgt/von_mises.hpp"

namespace lgt {

enum class Algorithm { Metropolis, Heatbath };

inline std::string to_string(Algorithm a) { return a == Algorithm::Metropolis ? "metropolis" : "heatbath"; }
inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "metropolis") return Algorithm::Metropolis;
  if (s == "heatbath") return Algorithm::Heatbath;
  throw ConfigError("unknown algorithm '" + s + "' (expected metropolis or heatbath)");
}

struct McParams {
  Algorithm algorithm = Algorithm::Heatbath;
  int sweeps = 1000;         ///< measurement-phase sweeps
  int thermalization = 100;  ///< discarded sweeps
  int thinning = 1;          ///< sweeps between measurements
  double width = 0.5;        ///< Metropolis proposal width
  double target_acceptance = 0.5;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  bool adapt = true;  ///< tune width during thermalization only

  void validate() const {
    require_config(sweeps >= 0 && thermalization >= 0, "sweep counts must be >= 0");
    require_config(thinning >= 1, "thinning must be >= 1");
    require_config(width > 0.0 && std::isfinite(width), "proposal width must be > 0");
    require_config(target_acceptance > 0.0 && target_acceptance < 1.0, "target acceptance must lie in (0, 1)");
  }
};

struct SweepStats {
  long proposals = 0;
  long accepted = 0;
  double rate() const { return proposals > 0 ? static_cast<double>(accepted) / proposals : 1.0; }
  SweepStats& operator+=(const SweepStats& o) {
    proposals += o.proposals;
    accepted += o.accepted;
    return *this;
  }
};

struct ChainStats {
  double acceptance = 1.0;
  long sweeps_done = 0;
  double wall_seconds = 0.0;
  double final_width = 0.0;
  std::vector<double> tau_int;  ///< filled by the caller after estimation
};

// ---------------------------------------------------------------------------
// Gauge updates

/// One lexicographic pass of Metropolis updates: candidate = q * U(e) with q
/// from the symmetric near-identity proposal, accepted with min(1, e^{-beta dS}).
template <class G>
SweepStats metropolis_sweep(GaugeField<G>& u, double beta, double width, RngStream& rng) {
  const G& g = u.group();
  SweepStats st;
  for (int e = 0; e < u.num_edges(); ++e) {
    const auto staple = staple_sum(u, e);
    auto candidate = g.compose(g.propose(width, rng), u[e]);
    const double ds = local_action_delta(u, e, candidate, staple);
    ++st.proposals;
    // beta = 0 (or dS <= 0) accepts without consuming a uniform.
    if (beta * ds <= 0.0 || rng.uniform() < std::exp(-beta * ds)) {
      u[e] = std::move(candidate);
      ++st.accepted;
    }
  }
  return st;
}

/// Exact heat-bath pass for U(1): given its staple s, an edge angle has
/// density proportional to exp(beta |s| cos(theta + arg s)).
inline SweepStats heatbath_sweep(GaugeField<CircleGroup>& u, double beta, RngStream& rng) {
  for (int e = 0; e < u.num_edges(); ++e) {
    const Complex s = staple_sum(u, e);
    u[e] = sample_von_mises(beta * std::abs(s), -std::arg(s), rng);
  }
  return {u.num_edges(), u.num_edges()};
}

/// Exact heat-bath pass for Z_m: inverse-CDF draw from the m-point conditional.
inline SweepStats heatbath_sweep(GaugeField<CyclicGroup>& u, double beta, RngStream& rng) {
  const CyclicGroup& g = u.group();
  std::vector<double> w(g.m);
  for (int e = 0; e < u.num_edges(); ++e) {
    const Complex s = staple_sum(u, e);
    double total = 0.0;
    for (int k = 0; k < g.m; ++k) {
      w[k] = std::exp(beta * (g.re_trace_product(k, s) - std::abs(s)));
      total += w[k];
    }
    double x = rng.uniform() * total;
    int k = 0;
    while (k + 1 < g.m && x >= w[k]) x -= w[k++];
    u[e] = k;
  }
  return {u.num_edges(), u.num_edges()};
}

inline SweepStats heatbath_sweep(GaugeField<UnitaryGroup>&, double, RngStream&) {
  throw ConfigError("heat-bath updates are only available for U(1) and Z_m gauge groups");
}

template <class G>
constexpr bool kHasHeatbath = !std::is_same_v<G, UnitaryGroup>;

// ---------------------------------------------------------------------------
// Weighted XY updates

/// Heat-bath pass over sites in lexicographic order. Each spin is redrawn
/// from its exact conditional, von Mises with parameter u = local_field.
inline SweepStats xy_heatbath_sweep(SpinField& s, RngStream& rng) {
  const int m = s.levels();
  std::vector<double> w(static_cast<std::size_t>(m));
  for (int x = 0; x < s.geometry().num_sites(); ++x) {
    const Complex u = s.local_field(x);
    if (m == 0) {
      s.set_angle(x, sample_von_mises(std::abs(u), std::arg(u), rng));
      continue;
    }
    const double kappa = std::abs(u), mu = std::arg(u);
    double total = 0.0;
    for (int k = 0; k < m; ++k) {
      w[k] = std::exp(kappa * (std::cos(kTwoPi * k / m - mu) - 1.0));
      total += w[k];
    }
    double r = rng.uniform() * total;
    int k = 0;
    while (k + 1 < m && r >= w[k]) r -= w[k++];
    s.set_angle(x, kTwoPi * k / m);
  }
  return {s.geometry().num_sites(), s.geometry().num_sites()};
}

// ---------------------------------------------------------------------------
// Chains

/// A gauge Markov chain: field, coupling, RNG stream and proposal width.
template <class G>
class GaugeChain {
 public:
  using Field = GaugeField<G>;

  GaugeChain(Field field, double beta, McParams mc)
      : field_(std::move(field)), beta_(beta), mc_(mc), rng_(mc.seed, mc.stream), width_(mc.width) {
    mc_.validate();
    require_config(beta_ >= 0.0, "beta must be >= 0");
    if (mc_.algorithm == Algorithm::Heatbath && !kHasHeatbath<G>)
      throw ConfigError("heat-bath updates are only available for U(1) and Z_m gauge groups");
  }

  const Field& field() const { return field_; }
  Field& field() { return field_; }
  double beta() const { return beta_; }
  const McParams& params() const { return mc_; }
  double width() const { return width_; }
  RngStream& rng() { return rng_; }
  const RngStream& rng() const { return rng_; }
  long sweeps_done() const { return sweeps_done_; }
  const SweepStats& totals() const { return totals_; }

  /// One sweep. During thermalization with adapt=true the Metropolis width
  /// is nudged toward the target acceptance; afterwards it is frozen.
  SweepStats sweep(bool thermalizing = false) {
    SweepStats st;
    if (mc_.algorithm == Algorithm::Heatbath) {
      st = heatbath_sweep(field_, beta_, rng_);
    } else {
      st = metropolis_sweep(field_, beta_, width_, rng_);
      if (thermalizing && mc_.adapt) {
        width_ *= std::exp(0.5 * (st.rate() - mc_.target_acceptance));
        width_ = std::clamp(width_, 1e-4, 2.0 * std::numbers::pi);
      }
    }
    ++sweeps_done_;
    if (!thermalizing) totals_ += st;
    return st;
  }

  void restore(Field field, RngStream rng, double width, long sweeps_done, SweepStats totals) {
    field_ = std::move(field);
    rng_ = std::move(rng);
    width_ = width;
    sweeps_done_ = sweeps_done;
    totals_ = totals;
  }

 private:
  Field field_;
  double beta_;
  McParams mc_;
  RngStream rng_;
  double width_;
  long sweeps_done_ = 0;
  SweepStats totals_;
};

class XyChain {
 public:
  using Field = SpinField;

  XyChain(SpinField field, McParams mc) : field_(std::move(field)), mc_(mc), rng_(mc.seed, mc.stream) {
    mc_.validate();
    require_config(mc_.algorithm == Algorithm::Heatbath, "weighted XY chains use heat-bath updates");
  }

  const SpinField& field() const { return field_; }
  SpinField& field() { return field_; }
  const McParams& params() const { return mc_; }
  RngStream& rng() { return rng_; }
  const RngStream& rng() const { return rng_; }
  long sweeps_done() const { return sweeps_done_; }
  double width() const { return 0.0; }
  const SweepStats& totals() const { return totals_; }

  SweepStats sweep(bool thermalizing = false) {
    const SweepStats st = xy_heatbath_sweep(field_, rng_);
    ++sweeps_done_;
    if (!thermalizing) totals_ += st;
    return st;
  }

 private:
  SpinField field_;
  McParams mc_;
  RngStream rng_;
  long sweeps_done_ = 0;
  SweepStats totals_;
};

/// A named scalar measured on a field snapshot.
template <class Field>
struct Observable {
  std::string name;
  std::function<Complex(const Field&)> measure;
};

struct ChainRun {
  std::vector<std::string> names;
  std::vector<std::vector<Complex>> series;  ///< one time series per observable
  ChainStats stats;
};

/// Thermalize, then measure every `thinning` sweeps until `sweeps` measurement
/// sweeps are done. Deterministic given (seed, stream).
template <class Chain>
ChainRun run_chain(Chain& chain, const std::vector<Observable<typename Chain::Field>>& observables) {
  const McParams& mc = chain.params();
  const int n_meas = mc.sweeps / mc.thinning;
  require_config(n_meas >= 1, "measurement budget is zero (sweeps / thinning < 1)");
  require_config(!observables.empty(), "no observables requested");

  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < mc.thermalization; ++i) chain.sweep(true);

  ChainRun run;
  for (const auto& o : observables) run.names.push_back(o.name);
  run.series.assign(observables.size(), {});
  for (auto& s : run.series) s.reserve(static_cast<std::size_t>(n_meas));
  for (int k = 0; k < n_meas; ++k) {
    for (int t = 0; t < mc.thinning; ++t) chain.sweep(false);
    for (std::size_t o = 0; o < observables.size(); ++o) run.series[o].push_back(observables[o].measure(chain.field()));
  }
  run.stats.acceptance = chain.totals().rate();
  run.stats.sweeps_done = chain.sweeps_done();
  run.stats.final_width = chain.width();
  run.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

}  // namespace lgt
