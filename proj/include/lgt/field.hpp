#pragma once

// Gauge fields, the Wilson action and its local decomposition, the
// expanded (U, xi) model with a central U(1) twist, and gauge transforms.

#include <memory>
#include <span>
#include <vector>

#include "lgt/group.hpp"
#include "lgt/lattice.hpp"

namespace lgt {

struct ModelParams {
  GroupId group = GroupId::circle();
  double beta = 0.0;
  bool oracle = false;  ///< Z_m groups are admitted only for oracle comparisons

  int n() const { return group.n(); }
  void validate() const {
    require_config(beta >= 0.0 && std::isfinite(beta), "beta must be finite and >= 0");
    require_config(group.kind() != GroupId::Kind::CyclicZm || oracle,
                   "group " + group.name() + " is an oracle discretization; set oracle = true to use it");
  }
};

/// One group element per positively oriented edge. Reversed edges are never
/// stored: U(y, x) is always derived as U(x, y)^{-1}.
template <class G>
class GaugeField {
 public:
  using Element = typename G::Element;

  GaugeField(std::shared_ptr<const LatticeGeometry> geometry, G group)
      : geometry_(std::move(geometry)), group_(std::move(group)) {
    links_.assign(static_cast<std::size_t>(geometry_->num_edges()), group_.identity());
  }

  const LatticeGeometry& geometry() const { return *geometry_; }
  const std::shared_ptr<const LatticeGeometry>& geometry_ptr() const { return geometry_; }
  const G& group() const { return group_; }

  int num_edges() const { return static_cast<int>(links_.size()); }
  const Element& operator[](int edge) const { return links_[edge]; }
  Element& operator[](int edge) { return links_[edge]; }
  const std::vector<Element>& links() const { return links_; }

  /// U along a step: the stored element, or its inverse against orientation.
  Element along(const Step& s) const { return s.sign > 0 ? links_[s.edge] : group_.invert(links_[s.edge]); }

  void set_identity() { std::fill(links_.begin(), links_.end(), group_.identity()); }
  void randomize(RngStream& rng) {
    for (auto& u : links_) u = group_.haar(rng);
  }

 private:
  std::shared_ptr<const LatticeGeometry> geometry_;
  G group_;
  std::vector<Element> links_;
};

/// Central twist xi: one phase (angle) per positively oriented edge.
struct CentralTwist {
  std::vector<double> angles;

  static CentralTwist trivial(const LatticeGeometry& geo) { return {std::vector<double>(geo.num_edges(), 0.0)}; }
  double along(const Step& s) const { return s.sign > 0 ? angles[s.edge] : -angles[s.edge]; }
};

/// Ordered product of U along a step sequence.
template <class G>
typename G::Element path_product(const GaugeField<G>& u, std::span<const Step> steps) {
  const G& g = u.group();
  auto acc = g.identity();
  for (const Step& s : steps) acc = g.compose(acc, u.along(s));
  return acc;
}

template <class G>
typename G::Element plaquette_holonomy(const GaugeField<G>& u, int plaquette) {
  const auto& b = u.geometry().plaquette_boundary(plaquette);
  return path_product(u, std::span<const Step>(b));
}

/// S = sum_p Re Tr(I - U_p).
template <class G>
double wilson_action(const GaugeField<G>& u) {
  const G& g = u.group();
  double s = 0.0;
  for (int p = 0; p < u.geometry().num_plaquettes(); ++p) s += g.dim() - g.re_trace(plaquette_holonomy(u, p));
  return s;
}

/// Sum over plaquettes containing `edge` of the product of the other three
/// boundary links, oriented so that Re Tr(U(edge) * staple) equals the sum of
/// Re Tr U_p over those plaquettes.
template <class G>
typename G::Sum staple_sum(const GaugeField<G>& u, int edge) {
  const G& g = u.group();
  const LatticeGeometry& geo = u.geometry();
  auto sum = g.zero_sum();
  for (const Incidence& inc : geo.incident_plaquettes(edge)) {
    const auto& b = geo.plaquette_boundary(inc.plaquette);
    // Rotate the trace so this edge comes first: rest = A_{k+1} A_{k+2} A_{k+3}.
    auto rest = u.along(b[(inc.position + 1) % 4]);
    rest = g.compose(rest, u.along(b[(inc.position + 2) % 4]));
    rest = g.compose(rest, u.along(b[(inc.position + 3) % 4]));
    // Against orientation, Re Tr(U^{-1} rest) = Re Tr(U rest^{-1}).
    g.accumulate(sum, inc.sign > 0 ? rest : g.invert(rest));
  }
  return sum;
}

/// Action change from replacing U(edge) by `candidate`:
/// dS = -Re Tr((candidate - U(edge)) * staple).
template <class G>
double local_action_delta(const GaugeField<G>& u, int edge, const typename G::Element& candidate,
                          const typename G::Sum& staple) {
  const G& g = u.group();
  return -(g.re_trace_product(candidate, staple) - g.re_trace_product(u[edge], staple));
}

template <class G>
double local_action_delta(const GaugeField<G>& u, int edge, const typename G::Element& candidate) {
  return local_action_delta(u, edge, candidate, staple_sum(u, edge));
}

/// Product of the twist phases around a plaquette (inverses on sign -1 steps).
inline double twist_plaquette_angle(const LatticeGeometry& geo, const CentralTwist& xi, int plaquette) {
  double a = 0.0;
  for (const Step& s : geo.plaquette_boundary(plaquette)) a += xi.along(s);
  return wrap_angle(a);
}

/// xi_p * U_p.
template <class G>
typename G::Element twisted_holonomy(const GaugeField<G>& u, const CentralTwist& xi, int plaquette) {
  return u.group().central_multiply(plaquette_holonomy(u, plaquette), twist_plaquette_angle(u.geometry(), xi, plaquette));
}

/// sum_p Re Tr(I - xi_p U_p), the action of the expanded model.
template <class G>
double twisted_action(const GaugeField<G>& u, const CentralTwist& xi) {
  const G& g = u.group();
  double s = 0.0;
  for (int p = 0; p < u.geometry().num_plaquettes(); ++p) s += g.dim() - g.re_trace(twisted_holonomy(u, xi, p));
  return s;
}

/// The configuration e -> xi(e) U(e).
template <class G>
GaugeField<G> absorb_twist(const GaugeField<G>& u, const CentralTwist& xi) {
  GaugeField<G> out = u;
  for (int e = 0; e < u.num_edges(); ++e) out[e] = u.group().central_multiply(u[e], xi.angles[e]);
  return out;
}

/// U'(x, y) = g_x U(x, y) g_y^{-1}.
template <class G>
GaugeField<G> gauge_transform(const GaugeField<G>& u, std::span<const typename G::Element> g_site) {
  const LatticeGeometry& geo = u.geometry();
  require(static_cast<int>(g_site.size()) == geo.num_sites(), "gauge transform needs one element per site");
  const G& g = u.group();
  GaugeField<G> out = u;
  for (int e = 0; e < u.num_edges(); ++e)
    out[e] = g.compose(g.compose(g_site[geo.edge_base_site(e)], u[e]), g.invert(g_site[geo.edge_head_site(e)]));
  return out;
}

}  // namespace lgt
