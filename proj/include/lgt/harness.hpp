#pragma once

// End-to-end experiments: 3D Wilson-loop sweeps checked against the
// confinement bound |<W>| <= n exp(-C T ln(R+1) / (1 + n beta)), weighted XY
// decay sweeps, and the report writers (CSV, JSONL, JSON, gnuplot).

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lgt/estimate.hpp"
#include "lgt/observables.hpp"
#include "lgt/sampler.hpp"

namespace lgt {

/// C-hat = -(1 + n beta) ln(west / n) / (T ln(R + 1)).
inline double c_hat(double west, int R, int T, int n, double beta) {
  require(west > 0.0 && west <= n * (1.0 + 1e-12), "c_hat needs 0 < west <= n (use the censored path for west <= 0)");
  require(R >= 1 && T >= 1, "c_hat needs R, T >= 1");
  const double v = -(1.0 + n * beta) * std::log(std::min(1.0, west / n)) / (T * std::log(R + 1.0));
  return v == 0.0 ? 0.0 : v;  // no -0
}

// ---------------------------------------------------------------------------
// Plans

struct GaugeExperiment {
  std::string name;  ///< run id prefix
  GroupId group = GroupId::circle();
  std::vector<int> extents;
  std::vector<double> betas;
  McParams mc;
  bool hot_start = false;
};

struct SweepPlan {
  std::vector<GaugeExperiment> experiments;
  int max_T = 4;        ///< loops 1 <= R <= T <= max_T
  int margin = 2;       ///< sites between each loop and every face
  double c_floor = 0.05;
  std::uint64_t seed = 1;

  void validate() const {
    require_config(max_T >= 1, "max_T must be >= 1");
    require_config(margin >= 0, "margin must be >= 0");
    require_config(!experiments.empty(), "the plan has no experiments");
    for (const auto& ex : experiments) {
      require_config(!ex.betas.empty(), "experiment '" + ex.name + "' has no beta values");
      for (double b : ex.betas) ModelParams{ex.group, b, false}.validate();
      ex.mc.validate();
      const LatticeGeometry geo(static_cast<int>(ex.extents.size()), ex.extents);
      for (int R = 1; R <= max_T; ++R)
        for (int T = R; T <= max_T; ++T)
          if (loop_placements(geo, R, T, margin).empty())
            throw ConfigError("experiment '" + ex.name + "': loop " + std::to_string(R) + "x" + std::to_string(T) +
                              " does not fit the box with margin " + std::to_string(margin));
    }
  }
};

struct BoundRow {
  std::string run_id;
  std::string group;
  int n = 1;
  double beta = 0.0;
  int R = 0, T = 0;
  EstimatorResult est;
  LoopEntry entry;           ///< normalized |<W>|/n, censoring
  double c_hat = 0.0;        ///< estimate, or lower bound when censored
  double c_hat_error = 0.0;  ///< 0 for censored rows
  double acceptance = 1.0;
  double final_width = 0.0;
  std::size_t placements = 0;

  bool censored() const { return entry.censored; }
};

struct LinearFit {
  double slope = 0.0;
  double slope_error = 0.0;
  int points = 0;
  bool valid = false;
};

/// OLS of y = a + b x with the residual-based standard error of b.
inline LinearFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  f.points = static_cast<int>(x.size());
  if (f.points < 3) return f;
  double mx = 0, my = 0;
  for (int i = 0; i < f.points; ++i) mx += x[i], my += y[i];
  mx /= f.points;
  my /= f.points;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < f.points; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  const double a = my - f.slope * mx;
  double ssr = 0;
  for (int i = 0; i < f.points; ++i) ssr += std::pow(y[i] - a - f.slope * x[i], 2);
  f.slope_error = std::sqrt(ssr / (f.points - 2) / sxx);
  f.valid = true;
  return f;
}

/// Least squares through the origin, y = b x, with residual-based error.
inline LinearFit ols_origin(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  f.points = static_cast<int>(x.size());
  if (f.points < 2) return f;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < f.points; ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  double ssr = 0;
  for (int i = 0; i < f.points; ++i) ssr += std::pow(y[i] - f.slope * x[i], 2);
  f.slope_error = std::sqrt(ssr / (f.points - 1) / sxx);
  f.valid = true;
  return f;
}

struct RunSummary {
  std::string run_id;
  std::vector<PotentialEstimate> potential;
  std::vector<CreutzEstimate> creutz;
  LinearFit linearization;  ///< with intercept, this run only
  double acceptance = 1.0;
  double final_width = 0.0;
};

struct BoundChecks {
  bool uncensored_positive = true;  ///< every uncensored C-hat > 0 at 3 sigma
  double min_c_uncensored = std::numeric_limits<double>::infinity();
  double min_c_censored = std::numeric_limits<double>::infinity();
  LinearFit pooled;  ///< through the origin, all runs together
  bool per_run_slopes_positive = true;
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
};

struct BoundReport {
  std::vector<BoundRow> rows;
  std::vector<RunSummary> runs;
  BoundChecks checks;
  double c_floor = 0.05;
};

/// One table row from a loop's time series: estimate, censoring, C-hat.
inline BoundRow make_bound_row(const std::string& id, const std::string& group, int n, double beta, const LoopAverage& loop,
                               std::span<const Complex> series) {
  BoundRow r;
  r.run_id = id;
  r.group = group;
  r.n = n;
  r.beta = beta;
  r.R = loop.R();
  r.T = loop.T();
  r.placements = loop.placements();
  r.est = estimate(series);
  r.entry = make_loop_entry(r.est.abs_mean, r.est.std_error, n);
  if (r.entry.censored) {
    const double upper = std::min(r.entry.upper * n, static_cast<double>(n));
    r.c_hat = c_hat(upper, r.R, r.T, n, beta);
  } else {
    r.c_hat = c_hat(r.est.abs_mean, r.R, r.T, n, beta);
    r.c_hat_error = (1.0 + n * beta) / (r.T * std::log(r.R + 1.0)) * r.est.abs_stderr / r.est.abs_mean;
  }
  return r;
}

namespace detail {

inline double linearization_y(const BoundRow& r) { return -std::log(r.entry.value) * (1.0 + r.n * r.beta); }
inline double linearization_x(const BoundRow& r) { return r.T * std::log(r.R + 1.0); }

inline std::string run_id(const GaugeExperiment& ex, double beta) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_b%g", ex.name.c_str(), beta);
  return buf;
}

template <class G>
std::pair<std::vector<BoundRow>, RunSummary> run_gauge_task(const GaugeExperiment& ex, G group, double beta,
                                                            const SweepPlan& plan, std::uint64_t stream) {
  auto geo = std::make_shared<const LatticeGeometry>(static_cast<int>(ex.extents.size()), ex.extents);
  McParams mc = ex.mc;
  mc.seed = plan.seed;
  mc.stream = stream;
  GaugeField<G> field(geo, group);
  GaugeChain<G> chain(std::move(field), beta, mc);
  if (ex.hot_start) chain.field().randomize(chain.rng());

  std::vector<std::shared_ptr<LoopAverage>> loops;
  std::vector<Observable<GaugeField<G>>> obs;
  for (int R = 1; R <= plan.max_T; ++R)
    for (int T = R; T <= plan.max_T; ++T) {
      auto la = std::make_shared<LoopAverage>(*geo, R, T, plan.margin);
      loops.push_back(la);
      obs.push_back({std::to_string(R) + "x" + std::to_string(T), [la](const GaugeField<G>& u) { return (*la)(u); }});
    }
  const ChainRun run = run_chain(chain, obs);

  const int n = group.dim();
  const std::string id = run_id(ex, beta);
  std::vector<BoundRow> rows;
  LoopTable table;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    BoundRow r = make_bound_row(id, ex.group.name(), n, beta, *loops[i], run.series[i]);
    r.acceptance = run.stats.acceptance;
    r.final_width = run.stats.final_width;
    table[{r.R, r.T}] = r.entry;
    rows.push_back(r);
  }

  RunSummary s;
  s.run_id = id;
  s.acceptance = run.stats.acceptance;
  s.final_width = run.stats.final_width;
  s.potential = effective_potential(table);
  for (int R = 2; R <= plan.max_T; ++R)
    for (int T = R; T <= plan.max_T; ++T) s.creutz.push_back(creutz_ratio(table, R, T));
  std::vector<double> x, y;
  for (const auto& r : rows)
    if (!r.censored()) {
      x.push_back(linearization_x(r));
      y.push_back(linearization_y(r));
    }
  s.linearization = ols(x, y);
  return {rows, s};
}

/// Run tasks [0, count) on `threads` workers; results land in task order.
template <class Result>
std::vector<Result> parallel_tasks(int count, int threads, const std::function<Result(int)>& task) {
  std::vector<Result> out(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        out[i] = task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int t = std::max(1, std::min(threads, count));
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace detail

inline BoundChecks check_bound(const std::vector<BoundRow>& rows, const std::vector<RunSummary>& runs, double c_floor) {
  BoundChecks c;
  std::vector<double> x, y;
  char buf[256];
  for (const auto& r : rows) {
    if (r.censored()) {
      c.min_c_censored = std::min(c.min_c_censored, r.c_hat);
      if (r.c_hat < c_floor) {
        std::snprintf(buf, sizeof buf, "%s %dx%d: censored lower bound %.4g < %.3g", r.run_id.c_str(), r.R, r.T, r.c_hat, c_floor);
        c.failures.push_back(buf);
      }
      continue;
    }
    c.min_c_uncensored = std::min(c.min_c_uncensored, r.c_hat);
    if (!(r.c_hat - 3.0 * r.c_hat_error > 0.0)) {
      c.uncensored_positive = false;
      std::snprintf(buf, sizeof buf, "%s %dx%d: C-hat %.4g +- %.2g not > 0 at 3 sigma", r.run_id.c_str(), r.R, r.T, r.c_hat,
                    r.c_hat_error);
      c.failures.push_back(buf);
    }
    if (r.c_hat < c_floor) {
      std::snprintf(buf, sizeof buf, "%s %dx%d: C-hat %.4g < %.3g", r.run_id.c_str(), r.R, r.T, r.c_hat, c_floor);
      c.failures.push_back(buf);
    }
    x.push_back(detail::linearization_x(r));
    y.push_back(detail::linearization_y(r));
  }
  c.pooled = ols_origin(x, y);
  if (!c.pooled.valid || !(c.pooled.slope - 3.0 * c.pooled.slope_error > 0.0)) {
    std::snprintf(buf, sizeof buf, "pooled linearization slope %.4g +- %.2g (%d points) not > 0 at 3 sigma", c.pooled.slope,
                  c.pooled.slope_error, c.pooled.points);
    c.failures.push_back(buf);
  }
  for (const auto& s : runs) {
    if (!s.linearization.valid) continue;
    if (!(s.linearization.slope - 3.0 * s.linearization.slope_error > 0.0)) {
      c.per_run_slopes_positive = false;
      std::snprintf(buf, sizeof buf, "%s: linearization slope %.4g +- %.2g not > 0 at 3 sigma", s.run_id.c_str(),
                    s.linearization.slope, s.linearization.slope_error);
      c.failures.push_back(buf);
    }
  }
  return c;
}

/// Every (experiment, beta) pair is one task with its own RNG stream (the
/// task's position in plan order), so results do not depend on `threads`.
inline BoundReport run_confinement_sweep(const SweepPlan& plan, int threads = 1) {
  plan.validate();
  std::vector<std::pair<int, int>> tasks;
  for (int e = 0; e < static_cast<int>(plan.experiments.size()); ++e)
    for (int b = 0; b < static_cast<int>(plan.experiments[e].betas.size()); ++b) tasks.push_back({e, b});

  using Result = std::pair<std::vector<BoundRow>, RunSummary>;
  auto results = detail::parallel_tasks<Result>(static_cast<int>(tasks.size()), threads, [&](int i) -> Result {
    const auto& ex = plan.experiments[tasks[i].first];
    const double beta = ex.betas[tasks[i].second];
    const auto stream = static_cast<std::uint64_t>(i);
    switch (ex.group.kind()) {
      case GroupId::Kind::CircleU1:
        return detail::run_gauge_task(ex, CircleGroup{}, beta, plan, stream);
      case GroupId::Kind::UnitaryN:
        return detail::run_gauge_task(ex, UnitaryGroup(ex.group.n()), beta, plan, stream);
      default:
        throw ConfigError("confinement sweeps run on U(1) or U(n), not " + ex.group.name());
    }
  });

  BoundReport rep;
  rep.c_floor = plan.c_floor;
  for (auto& [rows, summary] : results) {
    rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
    rep.runs.push_back(std::move(summary));
  }
  rep.checks = check_bound(rep.rows, rep.runs, plan.c_floor);
  return rep;
}

// ---------------------------------------------------------------------------
// Weighted XY decay

struct XyPlan {
  std::vector<int> extents{32, 32};
  double modulus = 1.0;         ///< |w_e|
  bool random_phases = false;   ///< w_e = |w| e^{i gamma_e}, gamma_e uniform
  int max_R = 8;
  int margin = 2;
  McParams mc;
  double doubled_modulus = 0.0;  ///< > 0: also run at this |w| and test the L-scaling form
  std::uint64_t seed = 1;

  void validate() const {
    require_config(extents.size() == 2, "XY sweeps need a 2D box");
    require_config(modulus >= 0.0 && std::isfinite(modulus), "coupling modulus must be finite and >= 0");
    require_config(max_R >= 2, "max_R must be >= 2");
    require_config(doubled_modulus >= 0.0, "doubled_modulus must be >= 0");
    mc.validate();
    const LatticeGeometry geo(2, extents);
    TwoPointAverage(geo, max_R, margin);
  }
};

struct DecayRow {
  int R = 0;
  EstimatorResult est;
  LoopEntry entry;  ///< |<conj(phi_x) phi_y>| with the loop censoring rule (n = 1)
};

struct DecaySeries {
  double modulus = 0.0;
  double L = 1.0;
  std::vector<DecayRow> rows;
  double c_fit = 0.0;  ///< exponent in (R+1)^{-c}, fitted through the origin
  double c_error = 0.0;
  int fit_points = 0;
  std::vector<double> step_diff, step_error;  ///< |G(R+1)| - |G(R)| with jackknife error
  bool monotone = true;                      ///< no step increases by more than 3 sigma
};

struct MwReport {
  DecaySeries base;
  bool has_doubled = false;
  DecaySeries doubled;
  double certified = 0.0;  ///< c_fit * L of the base run
  bool doubled_within_bound = true;
  std::vector<std::string> doubled_violations;
  std::vector<std::string> failures;  ///< base-run assertions
  bool pass() const { return failures.empty(); }
};

namespace detail {

inline DecaySeries run_xy_series(const XyPlan& plan, double modulus, std::uint64_t stream) {
  auto geo = std::make_shared<const LatticeGeometry>(2, plan.extents);
  SpinField s(geo);
  RngStream phases(plan.seed, stream + (1ull << 32));
  for (int e = 0; e < geo->num_edges(); ++e)
    s.set_coupling(e, plan.random_phases ? std::polar(modulus, phases.uniform(0.0, kTwoPi)) : Complex(modulus, 0.0));
  McParams mc = plan.mc;
  mc.algorithm = Algorithm::Heatbath;
  mc.seed = plan.seed;
  mc.stream = stream;
  XyChain chain(std::move(s), mc);

  std::vector<std::shared_ptr<TwoPointAverage>> tp;
  std::vector<Observable<SpinField>> obs;
  for (int R = 1; R <= plan.max_R; ++R) {
    auto a = std::make_shared<TwoPointAverage>(*geo, R, plan.margin);
    tp.push_back(a);
    obs.push_back({"G" + std::to_string(R), [a](const SpinField& f) { return (*a)(f); }});
  }
  const ChainRun run = run_chain(chain, obs);

  DecaySeries d;
  d.modulus = modulus;
  d.L = chain.field().coupling_scale();
  int bin = 1;
  for (int R = 1; R <= plan.max_R; ++R) {
    DecayRow r;
    r.R = R;
    r.est = estimate(std::span<const Complex>(run.series[R - 1]));
    r.entry = make_loop_entry(r.est.abs_mean, r.est.std_error, 1.0);
    bin = std::max(bin, r.est.bin_size);
    d.rows.push_back(r);
  }
  std::vector<std::span<const Complex>> all;
  for (const auto& v : run.series) all.emplace_back(v);
  const auto bins = static_cast<int>(run.series[0].size()) / bin;
  if (bins < 2) throw ConfigError("XY run too short for a jackknife over " + std::to_string(bin) + "-sweep bins");

  for (int R = 1; R < plan.max_R; ++R) {
    const auto j = jackknife(std::span<const std::span<const Complex>>(all), bin, [R](std::span<const Complex> m) {
      return std::abs(m[R]) - std::abs(m[R - 1]);
    });
    d.step_diff.push_back(j.value);
    d.step_error.push_back(j.error);
    if (j.value > 3.0 * j.error) d.monotone = false;
  }

  std::vector<int> use;
  for (const auto& r : d.rows)
    if (!r.entry.censored) use.push_back(r.R - 1);
  d.fit_points = static_cast<int>(use.size());
  if (!use.empty()) {
    const auto j = jackknife(std::span<const std::span<const Complex>>(all), bin, [&use](std::span<const Complex> m) {
      double sxy = 0, sxx = 0;
      for (int i : use) {
        const double x = std::log(i + 2.0);
        sxy += x * -std::log(std::abs(m[i]));
        sxx += x * x;
      }
      return sxy / sxx;
    });
    d.c_fit = j.value;
    d.c_error = j.error;
  }
  return d;
}

}  // namespace detail

inline MwReport run_mw_sweep(const XyPlan& plan, int threads = 1) {
  plan.validate();
  const int count = plan.doubled_modulus > 0.0 ? 2 : 1;
  auto series = detail::parallel_tasks<DecaySeries>(count, threads, [&](int i) {
    return detail::run_xy_series(plan, i == 0 ? plan.modulus : plan.doubled_modulus, static_cast<std::uint64_t>(i));
  });
  MwReport rep;
  rep.base = series[0];
  rep.certified = rep.base.c_fit * rep.base.L;
  char buf[256];
  if (!rep.base.monotone) rep.failures.push_back("two-point function increases with R beyond 3 sigma");
  if (rep.base.fit_points == 0)
    rep.failures.push_back("no uncensored distance to fit");
  else if (!(rep.base.c_fit - 3.0 * rep.base.c_error > 0.0)) {
    std::snprintf(buf, sizeof buf, "fitted exponent %.4g +- %.2g not > 0 at 3 sigma", rep.base.c_fit, rep.base.c_error);
    rep.failures.push_back(buf);
  }
  if (count == 2) {
    rep.has_doubled = true;
    rep.doubled = series[1];
    for (const auto& r : rep.doubled.rows) {
      const double bound = std::exp(-rep.certified / rep.doubled.L * std::log(r.R + 1.0));
      if (r.est.abs_mean - 3.0 * r.est.abs_stderr > bound) {
        rep.doubled_within_bound = false;
        std::snprintf(buf, sizeof buf, "R=%d: |G| = %.4g +- %.2g above exp(-%.4g ln(R+1) / %.3g) = %.4g", r.R, r.est.abs_mean,
                      r.est.abs_stderr, rep.certified, rep.doubled.L, bound);
        rep.doubled_violations.push_back(buf);
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report writers

inline std::string fmt_double(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline const char* kBoundCsvHeader =
    "run_id,group,n,beta,R,T,re_mean,im_mean,stderr,tau_int,n_meas,censored,abs_norm,abs_norm_err,c_hat,c_hat_err,"
    "c_hat_kind,warning";

/// Censored rows carry the upper bound on |<W>|/n and the C-hat lower bound;
/// their error columns stay empty.
inline std::string bound_csv(const std::vector<BoundRow>& rows) {
  std::ostringstream os;
  os << kBoundCsvHeader << "\n";
  for (const auto& r : rows) {
    os << r.run_id << "," << r.group << "," << r.n << "," << fmt_double(r.beta) << "," << r.R << "," << r.T << ","
       << fmt_double(r.est.mean.real()) << "," << fmt_double(r.est.mean.imag()) << "," << fmt_double(r.est.std_error) << ","
       << fmt_double(r.est.tau_int) << "," << r.est.n << "," << (r.censored() ? 1 : 0) << ",";
    if (r.censored())
      os << fmt_double(r.entry.upper) << ",," << fmt_double(r.c_hat) << ",,lower_bound,";
    else
      os << fmt_double(r.entry.value) << "," << fmt_double(r.entry.error) << "," << fmt_double(r.c_hat) << ","
         << fmt_double(r.c_hat_error) << ",estimate,";
    os << (r.est.warning ? 1 : 0) << "\n";
  }
  return os.str();
}

inline nlohmann::json estimate_json(const EstimatorResult& e) {
  return {{"re", e.mean.real()},      {"im", e.mean.imag()},   {"stderr", e.std_error}, {"abs", e.abs_mean},
          {"abs_stderr", e.abs_stderr}, {"tau_int", e.tau_int}, {"n_meas", e.n},          {"bins", e.bins},
          {"bin_size", e.bin_size},   {"warning", e.warning}};
}

inline nlohmann::json row_json(const BoundRow& r) {
  nlohmann::json j = {{"run_id", r.run_id}, {"group", r.group}, {"n", r.n}, {"beta", r.beta}, {"R", r.R}, {"T", r.T},
                      {"placements", r.placements}, {"acceptance", r.acceptance}, {"final_width", r.final_width},
                      {"estimate", estimate_json(r.est)}, {"censored", r.censored()}};
  if (r.censored()) {
    j["abs_norm_upper"] = r.entry.upper;
    j["c_hat_lower_bound"] = r.c_hat;
  } else {
    j["abs_norm"] = r.entry.value;
    j["abs_norm_err"] = r.entry.error;
    j["c_hat"] = r.c_hat;
    j["c_hat_err"] = r.c_hat_error;
  }
  return j;
}

inline BoundRow row_from_json(const nlohmann::json& j) {
  BoundRow r;
  r.run_id = j.at("run_id");
  r.group = j.at("group");
  r.n = j.at("n");
  r.beta = j.at("beta");
  r.R = j.at("R");
  r.T = j.at("T");
  r.placements = j.value("placements", std::size_t{0});
  r.acceptance = j.value("acceptance", 1.0);
  r.final_width = j.value("final_width", 0.0);
  const auto& e = j.at("estimate");
  r.est.mean = Complex(e.at("re"), e.at("im"));
  r.est.std_error = e.at("stderr");
  r.est.abs_mean = e.at("abs");
  r.est.abs_stderr = e.at("abs_stderr");
  r.est.tau_int = e.at("tau_int");
  r.est.n = e.at("n_meas");
  r.est.bins = e.at("bins");
  r.est.bin_size = e.at("bin_size");
  r.est.warning = e.at("warning");
  r.entry = make_loop_entry(r.est.abs_mean, r.est.std_error, r.n);
  if (r.entry.censored != j.at("censored").get<bool>()) throw ConfigError("row " + r.run_id + ": censored flag inconsistent");
  r.c_hat = r.censored() ? j.at("c_hat_lower_bound").get<double>() : j.at("c_hat").get<double>();
  r.c_hat_error = r.censored() ? 0.0 : j.at("c_hat_err").get<double>();
  return r;
}

inline nlohmann::json summary_json(const BoundReport& rep) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& s : rep.runs) {
    nlohmann::json pot = nlohmann::json::array(), cr = nlohmann::json::array();
    for (const auto& p : s.potential)
      pot.push_back({{"R", p.R}, {"T_used", p.T_used}, {"V", p.V}, {"error", p.error}, {"censored", p.censored},
                     {"slope", p.slope}, {"slope_error", p.slope_error}, {"slope_valid", p.slope_valid}});
    for (const auto& c : s.creutz)
      cr.push_back({{"R", c.R}, {"T", c.T}, {"chi", c.chi}, {"error", c.error}, {"censored", c.censored}});
    runs.push_back({{"run_id", s.run_id},
                    {"acceptance", s.acceptance},
                    {"final_width", s.final_width},
                    {"potential", pot},
                    {"creutz", cr},
                    {"linearization",
                     {{"slope", s.linearization.slope},
                      {"slope_error", s.linearization.slope_error},
                      {"points", s.linearization.points},
                      {"valid", s.linearization.valid}}}});
  }
  const auto& c = rep.checks;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"rows", rep.rows.size()},
          {"c_floor", rep.c_floor},
          {"min_c_hat_uncensored", finite_or_null(c.min_c_uncensored)},
          {"min_c_hat_lower_bound_censored", finite_or_null(c.min_c_censored)},
          {"uncensored_positive_3sigma", c.uncensored_positive},
          {"pooled_linearization",
           {{"slope", c.pooled.slope}, {"slope_error", c.pooled.slope_error}, {"points", c.pooled.points}, {"valid", c.pooled.valid}}},
          {"per_run_slopes_positive", c.per_run_slopes_positive},
          {"failures", c.failures},
          {"pass", c.pass()},
          {"runs", runs}};
}

/// Plots ln(|<W>|/n) against T ln(R+1)/(1 + n beta); the bound puts every
/// point below a line of negative slope through the origin.
inline std::string gnuplot_script(const std::string& csv_name) {
  std::ostringstream os;
  os << "# load from the report directory\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel 'T ln(R+1) / (1 + n beta)'\n"
     << "set ylabel 'ln(|<W>|/n)'\n"
     << "set grid\n"
     << "x(n,b,R,T) = T*log(R+1)/(1+n*b)\n"
     << "plot '" << csv_name << "' using ($12==0 ? x($3,$4,$5,$6) : 1/0):(log($13)) with points pt 7 title 'estimate', \\\n"
     << "     '" << csv_name << "' using ($12==1 ? x($3,$4,$5,$6) : 1/0):(log($13)) with points pt 11 title 'upper bound (censored)'\n";
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

/// bound.csv, bound.jsonl, summary.json and plot.gp under `dir`.
inline void emit_report(const BoundReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  write_text_file(dir / "bound.csv", bound_csv(rep.rows));
  std::string jl;
  for (const auto& r : rep.rows) jl += row_json(r).dump() + "\n";
  write_text_file(dir / "bound.jsonl", jl);
  write_text_file(dir / "summary.json", summary_json(rep).dump(1) + "\n");
  write_text_file(dir / "plot.gp", gnuplot_script("bound.csv"));
}

/// Rebuild a report (summary and checks) from a bound.jsonl file.
inline BoundReport load_report(const std::filesystem::path& jsonl, double c_floor) {
  std::ifstream is(jsonl);
  if (!is) throw ConfigError("cannot open '" + jsonl.string() + "'");
  BoundReport rep;
  rep.c_floor = c_floor;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      rep.rows.push_back(row_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(jsonl.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  int max_T = 0;
  for (const auto& r : rep.rows) max_T = std::max(max_T, r.T);
  std::map<std::string, std::vector<const BoundRow*>> by_run;
  std::vector<std::string> order;
  for (const auto& r : rep.rows) {
    if (!by_run.count(r.run_id)) order.push_back(r.run_id);
    by_run[r.run_id].push_back(&r);
  }
  for (const auto& id : order) {
    RunSummary s;
    s.run_id = id;
    LoopTable table;
    std::vector<double> x, y;
    for (const BoundRow* r : by_run[id]) {
      table[{r->R, r->T}] = r->entry;
      s.acceptance = r->acceptance;
      s.final_width = r->final_width;
      if (!r->censored()) {
        x.push_back(detail::linearization_x(*r));
        y.push_back(detail::linearization_y(*r));
      }
    }
    s.potential = effective_potential(table);
    for (int R = 2; R <= max_T; ++R)
      for (int T = R; T <= max_T; ++T) s.creutz.push_back(creutz_ratio(table, R, T));
    s.linearization = ols(x, y);
    rep.runs.push_back(s);
  }
  rep.checks = check_bound(rep.rows, rep.runs, c_floor);
  return rep;
}

inline nlohmann::json decay_json(const DecaySeries& d) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : d.rows) {
    nlohmann::json j = {{"R", r.R}, {"estimate", estimate_json(r.est)}, {"censored", r.entry.censored}};
    if (r.entry.censored)
      j["abs_upper"] = r.entry.upper;
    else
      j["abs"] = r.entry.value;
    rows.push_back(j);
  }
  return {{"modulus", d.modulus}, {"L", d.L},           {"rows", rows},          {"c_fit", d.c_fit},
          {"c_error", d.c_error}, {"fit_points", d.fit_points}, {"step_diff", d.step_diff}, {"step_error", d.step_error},
          {"monotone", d.monotone}};
}

inline std::string decay_csv(const DecaySeries& d) {
  std::ostringstream os;
  os << "modulus,L,R,re_mean,im_mean,stderr,abs,abs_err,tau_int,n_meas,censored,warning\n";
  for (const auto& r : d.rows)
    os << fmt_double(d.modulus) << "," << fmt_double(d.L) << "," << r.R << "," << fmt_double(r.est.mean.real()) << ","
       << fmt_double(r.est.mean.imag()) << "," << fmt_double(r.est.std_error) << ","
       << fmt_double(r.entry.censored ? r.entry.upper : r.est.abs_mean) << ","
       << (r.entry.censored ? std::string() : fmt_double(r.est.abs_stderr)) << "," << fmt_double(r.est.tau_int) << ","
       << r.est.n << "," << (r.entry.censored ? 1 : 0) << "," << (r.est.warning ? 1 : 0) << "\n";
  return os.str();
}

inline nlohmann::json mw_json(const MwReport& rep) {
  nlohmann::json j = {{"base", decay_json(rep.base)}, {"certified_c_times_L", rep.certified}, {"failures", rep.failures},
                      {"pass", rep.pass()}};
  if (rep.has_doubled) {
    j["doubled"] = decay_json(rep.doubled);
    j["doubled_within_bound"] = rep.doubled_within_bound;
    j["doubled_violations"] = rep.doubled_violations;
  }
  return j;
}

inline void emit_mw_report(const MwReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  std::string csv = decay_csv(rep.base);
  if (rep.has_doubled) {
    const std::string more = decay_csv(rep.doubled);
    csv += more.substr(more.find('\n') + 1);
  }
  write_text_file(dir / "decay.csv", csv);
  write_text_file(dir / "decay.json", mw_json(rep).dump(1) + "\n");
}

}  // namespace lgt
