#pragma once

// JSON reports for the lemma certification and the enumeration oracle.

#include <json.hpp>
#include <optional>

#include "lgt/enumerate.hpp"
#include "lgt/lemmas.hpp"

namespace lgt {

struct LemmaCheckConfig {
  double kappa_min = 1e-2;
  double kappa_max = 1e2;
  int points = 200;
  double lemma1_constant = 1.0;
  double corollary_constant = 0.45;
  double bessel_tolerance = 1e-10;  ///< relative, against quadrature
  std::optional<double> fault_kappa;  ///< corrupt the ratio table at the grid point nearest this kappa
};

/// Grid infima, the safe-constant assertions, and the Bessel cross-check.
/// The ratio table is computed once; a fault, if requested, is written into
/// it before any assertion reads it.
inline nlohmann::json lemmas_check(const LemmaCheckConfig& c) {
  require_config(c.kappa_min > 0.0 && c.kappa_max > c.kappa_min, "need 0 < kappa_min < kappa_max");
  require_config(c.points >= 2, "need at least 2 grid points");
  const auto grid = log_grid(c.kappa_min, c.kappa_max, c.points);
  auto table = ratio_table(grid);
  if (c.fault_kappa) {
    std::size_t at = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (std::abs(std::log(grid[i] / *c.fault_kappa)) < std::abs(std::log(grid[at] / *c.fault_kappa))) at = i;
    table[at] = 1.0 - 1e-6;  // a near-degenerate law
  }

  auto certify = [&](auto ratio, double constant, const char* what) {
    const auto inf = grid_infimum(grid, table, ratio);
    nlohmann::json violated = nlohmann::json::array();
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (ratio(grid[i], table[i]) < constant) violated.push_back(grid[i]);
    return nlohmann::json{{"statement", what},
                          {"infimum", inf.value},
                          {"at_kappa", inf.at_kappa},
                          {"safe_constant", constant},
                          {"violated_kappa", violated},
                          {"pass", violated.empty()}};
  };
  nlohmann::json out;
  out["grid"] = {{"kappa_min", c.kappa_min}, {"kappa_max", c.kappa_max}, {"points", c.points}, {"spacing", "log"}};
  out["lemma1"] = certify(lemma1_ratio, c.lemma1_constant, "2(1 - r^2) >= C min{1, 1/kappa}");
  out["corollary"] = certify(corollary_ratio, c.corollary_constant, "1 - r >= C min{1, 1/kappa}");

  double worst = 0.0, worst_kappa = 0.0;
  nlohmann::json bad = nlohmann::json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double q = bessel_ratio_quadrature(grid[i]);
    const double rel = std::abs(table[i] - q) / q;
    if (rel > worst) worst = rel, worst_kappa = grid[i];
    if (rel > c.bessel_tolerance) bad.push_back(grid[i]);
  }
  out["bessel"] = {{"max_relative_error", worst},
                   {"at_kappa", worst_kappa},
                   {"tolerance", c.bessel_tolerance},
                   {"violated_kappa", bad},
                   {"pass", bad.empty()}};
  out["pass"] = out["lemma1"]["pass"].get<bool>() && out["corollary"]["pass"].get<bool>() && out["bessel"]["pass"].get<bool>();
  return out;
}

/// Z, Z~, <W>, <chi Q> for loops anchored at the origin of the (0, 1) plane.
inline nlohmann::json oracle_report(const std::vector<int>& extents, int m, double beta,
                                    const std::vector<std::pair<int, int>>& sizes, double guard, double tolerance) {
  auto geo = std::make_shared<const LatticeGeometry>(static_cast<int>(extents.size()), extents);
  EnumerationPlan plan;
  plan.geometry = geo;
  plan.m = m;
  plan.beta = beta;
  plan.work_guard = guard;
  for (auto [R, T] : sizes) {
    LoopSpec l{{0, 0, 0}, 0, 1, R, T};
    if (!geo->loop_fits(l)) throw ConfigError("loop " + std::to_string(R) + "x" + std::to_string(T) + " does not fit the box");
    plan.loops.push_back(l);
  }
  const auto g = enumerate_gauge(plan);
  const auto x = enumerate_expanded(plan);
  nlohmann::json loops = nlohmann::json::array();
  double worst = std::abs(x.Z_tilde - g.Z);
  for (std::size_t i = 0; i < plan.loops.size(); ++i) {
    const double d = std::abs(x.chi_q[i] - g.wilson[i]);
    worst = std::max(worst, d);
    loops.push_back({{"R", plan.loops[i].R},
                     {"T", plan.loops[i].T},
                     {"W", {g.wilson[i].real(), g.wilson[i].imag()}},
                     {"chi_Q", {x.chi_q[i].real(), x.chi_q[i].imag()}},
                     {"abs_diff", d}});
  }
  return {{"extents", extents},
          {"m", m},
          {"beta", beta},
          {"Z", g.Z},
          {"Z_tilde", x.Z_tilde},
          {"abs_diff_Z", std::abs(x.Z_tilde - g.Z)},
          {"loops", loops},
          {"state_count", g.state_count},
          {"state_count_expanded", x.state_count},
          {"transfer_work", g.work + x.work},
          {"tolerance", tolerance},
          {"pass", worst <= tolerance}};
}

}  // namespace lgt
