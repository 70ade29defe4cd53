#pragma once

// Exact enumeration oracles over the finite group Z_m.
//
// Gauge sums over (Z_m)^E are organized as an edge-by-edge transfer: edges
// are visited in index order and the running table is keyed by the partial
// holonomies of the plaquettes that are open (some but not all of their
// edges assigned). Every configuration is summed exactly once; the table only
// groups configurations that share the same open partial holonomies. Z_m is
// abelian, so partial holonomies can be accumulated in edge order.
//
// All sums are normalized by the Haar measure (1/m per edge) and accumulated
// with Neumaier compensation.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "lgt/field.hpp"
#include "lgt/spin.hpp"

namespace lgt {

/// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct CompensatedComplex {
  CompensatedSum re, im;
  void add(Complex z) {
    re.add(z.real());
    im.add(z.imag());
  }
  Complex value() const { return {re.value(), im.value()}; }
};

inline constexpr double kDefaultWorkGuard = 1e9;

struct EnumerationPlan {
  std::shared_ptr<const LatticeGeometry> geometry;
  int m = 8;
  double beta = 0.0;
  std::vector<LoopSpec> loops;
  bool identity_twist_only = false;  ///< expanded model: restrict xi to the identity sector
  double work_guard = kDefaultWorkGuard;
};

struct GaugeEnumeration {
  double Z = 0.0;
  std::vector<Complex> wilson;  ///< <W_l> per requested loop
  double state_count = 0.0;     ///< m^E
  double work = 0.0;            ///< transfer table updates performed
};

struct ExpandedEnumeration {
  double Z_tilde = 0.0;
  std::vector<Complex> chi_q;  ///< <chi_l Q_l> per requested loop
  double state_count = 0.0;    ///< (m^2)^E
  double work = 0.0;
};

namespace detail {

/// Sum over v_e in [0, D) of prod_e (1/D) f_e(v_e) prod_p weight(state_p),
/// where each plaquette state starts at 0 and is advanced edge by edge.
struct TransferProblem {
  int domain = 0;
  int plaquette_states = 0;
  std::function<int(int state, int value, int sign)> advance;
  std::vector<double> final_weight;             ///< indexed by final plaquette state
  std::vector<std::vector<Complex>> edge_factor;  ///< per edge, size D, or empty for 1
};

struct TransferPlan {
  std::vector<int> first, last;  // per plaquette: min/max boundary edge id
  double work = 0.0;
};

inline TransferPlan plan_transfer(const LatticeGeometry& geo, int domain, int states) {
  TransferPlan tp;
  const int np = geo.num_plaquettes();
  tp.first.assign(np, 0);
  tp.last.assign(np, 0);
  for (int p = 0; p < np; ++p) {
    int lo = geo.num_edges(), hi = -1;
    for (const Step& s : geo.plaquette_boundary(p)) {
      lo = std::min(lo, s.edge);
      hi = std::max(hi, s.edge);
    }
    tp.first[p] = lo;
    tp.last[p] = hi;
  }
  for (int e = 0; e < geo.num_edges(); ++e) {
    int open = 0;
    for (int p = 0; p < np; ++p)
      if (tp.first[p] <= e && e <= tp.last[p]) ++open;
    tp.work += std::pow(static_cast<double>(states), open) * domain;
  }
  return tp;
}

inline void check_guard(double work, double state_count, double guard) {
  if (work > guard) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "enumeration guard exceeded: state count %.6g, transfer work %.6g > guard %.6g", state_count,
                  work, guard);
    throw ConfigError(buf);
  }
}

inline Complex transfer_sum(const LatticeGeometry& geo, const TransferProblem& prob, const TransferPlan& tp) {
  const int D = prob.domain, P = prob.plaquette_states;
  const double inv_d = 1.0 / D;
  std::vector<int> active;  // plaquette ids, slot order
  std::vector<CompensatedComplex> table(1);
  table[0].add({1.0, 0.0});

  std::vector<int> states;
  for (int e = 0; e < geo.num_edges(); ++e) {
    std::vector<int> mid = active;
    for (int p = 0; p < geo.num_plaquettes(); ++p)
      if (tp.first[p] == e) mid.push_back(p);
    std::vector<int> next;
    for (int p : mid)
      if (tp.last[p] != e) next.push_back(p);

    // Slot of each mid plaquette in `next`, or -1 if it closes here; and the
    // sign with which edge e enters it (0 if not on its boundary).
    std::vector<int> slot_next(mid.size(), -1), sign_here(mid.size(), 0);
    for (std::size_t i = 0; i < mid.size(); ++i) {
      for (std::size_t j = 0; j < next.size(); ++j)
        if (next[j] == mid[i]) slot_next[i] = static_cast<int>(j);
      for (const Step& s : geo.plaquette_boundary(mid[i]))
        if (s.edge == e) sign_here[i] = s.sign;
    }

    std::size_t next_size = 1;
    for (std::size_t j = 0; j < next.size(); ++j) next_size *= static_cast<std::size_t>(P);
    std::vector<CompensatedComplex> out(next_size);
    const auto& factor = prob.edge_factor[e];

    states.assign(mid.size(), 0);
    for (std::size_t key = 0; key < table.size(); ++key) {
      const Complex base = table[key].value();
      if (base == Complex(0.0, 0.0)) continue;
      // Decode old key over `active` slots; newly opened slots start at 0.
      std::size_t rest = key;
      for (std::size_t i = 0; i < mid.size(); ++i) {
        if (i < active.size()) {
          states[i] = static_cast<int>(rest % P);
          rest /= P;
        } else {
          states[i] = 0;
        }
      }
      for (int v = 0; v < D; ++v) {
        Complex w = base * inv_d;
        if (!factor.empty()) w *= factor[v];
        std::size_t out_key = 0, mult = 1;
        std::vector<int> updated(states);
        for (std::size_t i = 0; i < mid.size(); ++i) {
          if (sign_here[i] != 0) updated[i] = prob.advance(updated[i], v, sign_here[i]);
          if (slot_next[i] < 0) w *= prob.final_weight[updated[i]];
        }
        for (std::size_t j = 0; j < next.size(); ++j) {
          std::size_t i = 0;
          while (mid[i] != next[j]) ++i;
          out_key += mult * static_cast<std::size_t>(updated[i]);
          mult *= static_cast<std::size_t>(P);
        }
        out[out_key].add(w);
      }
    }
    table = std::move(out);
    active = std::move(next);
  }
  CompensatedComplex total;
  for (const auto& t : table) total.add(t.value());
  return total.value();
}

inline std::vector<double> plaquette_weights_zm(int m, double beta) {
  std::vector<double> w(m);
  for (int k = 0; k < m; ++k) w[k] = std::exp(-beta * (1.0 - std::cos(kTwoPi * k / m)));
  return w;
}

}  // namespace detail

/// Exact Z (Haar-normalized) and <W_l> for the Z_m gauge theory.
inline GaugeEnumeration enumerate_gauge(const EnumerationPlan& plan) {
  const LatticeGeometry& geo = *plan.geometry;
  require_config(plan.m >= 2, "Z_m enumeration needs m >= 2");
  require_config(plan.beta >= 0.0, "beta must be >= 0");
  const int m = plan.m;
  GaugeEnumeration out;
  out.state_count = std::pow(static_cast<double>(m), geo.num_edges());
  const auto tp = detail::plan_transfer(geo, m, m);
  out.work = tp.work * (1.0 + plan.loops.size());
  detail::check_guard(out.work, out.state_count, plan.work_guard);

  const CyclicGroup g(m);
  detail::TransferProblem prob;
  prob.domain = m;
  prob.plaquette_states = m;
  prob.advance = [m](int s, int v, int sign) { return ((s + sign * v) % m + m) % m; };
  prob.final_weight = detail::plaquette_weights_zm(m, plan.beta);
  prob.edge_factor.assign(geo.num_edges(), {});
  out.Z = detail::transfer_sum(geo, prob, tp).real();

  for (const LoopSpec& l : plan.loops) {
    auto p = prob;
    for (const Step& s : geo.loop_edge_steps(l)) {
      auto& f = p.edge_factor[s.edge];
      if (f.empty()) f.assign(m, Complex(1.0, 0.0));
      for (int v = 0; v < m; ++v) f[v] *= g.trace(s.sign > 0 ? v : g.invert(v));
    }
    out.wilson.push_back(detail::transfer_sum(geo, p, tp) / out.Z);
  }
  return out;
}

/// Exact Z~ and <chi_l Q_l> for the expanded model: each edge carries
/// (U, xi) in Z_m x Z_m, with plaquette weight exp(-beta Re Tr(I - xi_p U_p)).
inline ExpandedEnumeration enumerate_expanded(const EnumerationPlan& plan) {
  const LatticeGeometry& geo = *plan.geometry;
  require_config(plan.m >= 2, "Z_m enumeration needs m >= 2");
  require_config(plan.beta >= 0.0, "beta must be >= 0");
  const int m = plan.m;
  const int twist_levels = plan.identity_twist_only ? 1 : m;
  const int domain = m * twist_levels;  // value = u + m * x
  ExpandedEnumeration out;
  out.state_count = std::pow(static_cast<double>(domain), geo.num_edges());
  const auto tp = detail::plan_transfer(geo, domain, m * m);
  out.work = tp.work * (1.0 + plan.loops.size());
  detail::check_guard(out.work, out.state_count, plan.work_guard);

  const CyclicGroup g(m);
  detail::TransferProblem prob;
  prob.domain = domain;
  prob.plaquette_states = m * m;  // (U_p partial, xi_p partial)
  prob.advance = [m, g](int s, int v, int sign) {
    const int u = v % m, x = v / m;
    int su = s % m, sx = s / m;
    su = g.compose(su, sign > 0 ? u : g.invert(u));
    sx = g.compose(sx, sign > 0 ? x : g.invert(x));
    return su + m * sx;
  };
  // Weight of the twisted holonomy: the central element xi_p times U_p.
  prob.final_weight.resize(static_cast<std::size_t>(m) * m);
  for (int su = 0; su < m; ++su)
    for (int sx = 0; sx < m; ++sx)
      prob.final_weight[su + m * sx] = std::exp(-plan.beta * (1.0 - g.re_trace(g.central_multiply(su, kTwoPi * sx / m))));
  prob.edge_factor.assign(geo.num_edges(), {});
  out.Z_tilde = detail::transfer_sum(geo, prob, tp).real();

  for (const LoopSpec& l : plan.loops) {
    auto p = prob;
    for (const Step& s : geo.loop_edge_steps(l)) {
      auto& f = p.edge_factor[s.edge];
      if (f.empty()) f.assign(domain, Complex(1.0, 0.0));
      for (int v = 0; v < domain; ++v) {
        const int u = v % m, x = v / m;
        const Complex chi = g.trace(s.sign > 0 ? x : g.invert(x));
        const Complex q = g.trace(s.sign > 0 ? u : g.invert(u));
        f[v] *= chi * q;
      }
    }
    out.chi_q.push_back(detail::transfer_sum(geo, p, tp) / out.Z_tilde);
  }
  return out;
}

/// Probability of every Z_m gauge configuration, indexed by
/// sum_e k_e m^e (edge 0 least significant). Brute force; small boxes only.
inline std::vector<double> gauge_state_probabilities(const LatticeGeometry& geo, int m, double beta,
                                                     double guard = 1e7) {
  const double count = std::pow(static_cast<double>(m), geo.num_edges());
  if (count > guard) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "state-probability enumeration guard exceeded: %.6g states", count);
    throw ConfigError(buf);
  }
  const std::size_t n = static_cast<std::size_t>(count);
  const CyclicGroup g(m);
  std::vector<double> p(n);
  std::vector<int> k(geo.num_edges(), 0);
  CompensatedSum z;
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t r = idx;
    for (int e = 0; e < geo.num_edges(); ++e) {
      k[e] = static_cast<int>(r % m);
      r /= m;
    }
    double s = 0.0;
    for (int q = 0; q < geo.num_plaquettes(); ++q) {
      int h = 0;
      for (const Step& st : geo.plaquette_boundary(q)) h = g.compose(h, st.sign > 0 ? k[st.edge] : g.invert(k[st.edge]));
      s += 1.0 - g.re_trace(h);
    }
    p[idx] = std::exp(-beta * s);
    z.add(p[idx]);
  }
  const double zt = z.value();
  for (double& v : p) v /= zt;
  return p;
}

inline std::size_t gauge_state_index(const GaugeField<CyclicGroup>& u) {
  std::size_t idx = 0, mult = 1;
  for (int e = 0; e < u.num_edges(); ++e) {
    idx += mult * static_cast<std::size_t>(u[e]);
    mult *= static_cast<std::size_t>(u.group().m);
  }
  return idx;
}

// ---------------------------------------------------------------------------
// Weighted XY over Z_m spins

struct XyEnumeration {
  double Z = 0.0;                   ///< normalized by m^{sites}
  std::vector<Complex> two_point;   ///< <conj(phi_x) phi_y> per requested pair
  std::vector<double> probabilities;  ///< per state when requested, index sum_s k_s m^s
};

/// Brute-force sum over (Z_m)^{sites} for the density
/// exp(sum_e Re(w_e phi_x conj(phi_y))).
inline XyEnumeration enumerate_xy(const LatticeGeometry& geo, int m, const std::vector<Complex>& couplings,
                                  const std::vector<std::pair<int, int>>& pairs, bool keep_probabilities = false,
                                  double guard = kDefaultWorkGuard) {
  require_config(m >= 2, "Z_m spins need m >= 2");
  require_config(static_cast<int>(couplings.size()) == geo.num_edges(), "one coupling per edge is required");
  const double count = std::pow(static_cast<double>(m), geo.num_sites());
  if (count * std::max(1, geo.num_edges()) > guard) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "XY enumeration guard exceeded: %.6g states", count);
    throw ConfigError(buf);
  }
  const std::size_t n = static_cast<std::size_t>(count);
  std::vector<Complex> phase(m);
  for (int k = 0; k < m; ++k) phase[k] = std::polar(1.0, kTwoPi * k / m);

  XyEnumeration out;
  if (keep_probabilities) out.probabilities.resize(n);
  std::vector<int> k(geo.num_sites(), 0);
  CompensatedSum z;
  std::vector<CompensatedComplex> acc(pairs.size());
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t r = idx;
    for (int s = 0; s < geo.num_sites(); ++s) {
      k[s] = static_cast<int>(r % m);
      r /= m;
    }
    double lw = 0.0;
    for (int e = 0; e < geo.num_edges(); ++e)
      lw += (couplings[e] * phase[k[geo.edge_base_site(e)]] * std::conj(phase[k[geo.edge_head_site(e)]])).real();
    const double w = std::exp(lw) / count;
    z.add(w);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      acc[i].add(w * std::conj(phase[k[pairs[i].first]]) * phase[k[pairs[i].second]]);
    if (keep_probabilities) out.probabilities[idx] = w;
  }
  out.Z = z.value();
  for (const auto& a : acc) out.two_point.push_back(a.value() / out.Z);
  if (keep_probabilities)
    for (double& p : out.probabilities) p /= out.Z;
  return out;
}

inline std::size_t xy_state_index(const SpinField& s) {
  std::size_t idx = 0, mult = 1;
  for (int x = 0; x < s.geometry().num_sites(); ++x) {
    idx += mult * static_cast<std::size_t>(s.level_index(x));
    mult *= static_cast<std::size_t>(s.levels());
  }
  return idx;
}

}  // namespace lgt
