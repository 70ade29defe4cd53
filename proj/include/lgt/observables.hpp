#pragma once

#include <utility>
#include <vector>

#include "lgt/field.hpp"
#include "lgt/spin.hpp"

namespace lgt {

/// W = Tr of the ordered product of U around the loop.
template <class G>
Complex wilson_loop_value(const GaugeField<G>& u, const LoopSpec& loop) {
  const auto steps = u.geometry().loop_edge_steps(loop);
  return u.group().trace(path_product(u, std::span<const Step>(steps)));
}

template <class G>
Complex wilson_loop_value(const GaugeField<G>& u, std::span<const Step> steps) {
  return u.group().trace(path_product(u, steps));
}

/// Every placement of an R x T rectangle (R along one axis, T along another,
/// both assignments) in every coordinate plane, keeping `margin` sites
/// between the loop and each face of the box.
inline std::vector<LoopSpec> loop_placements(const LatticeGeometry& geo, int R, int T, int margin) {
  std::vector<LoopSpec> out;
  const int d = geo.dim();
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      if (a == b) continue;
      if (R == T && a > b) continue;  // same rectangles as (b, a)
      for (int s = 0; s < geo.num_sites(); ++s) {
        LoopSpec l{geo.coord(s), a, b, R, T};
        if (geo.loop_fits(l, margin)) out.push_back(l);
      }
    }
  }
  return out;
}

/// Precomputed step lists for the translation/orientation average of one
/// loop shape.
class LoopAverage {
 public:
  LoopAverage(const LatticeGeometry& geo, int R, int T, int margin) : R_(R), T_(T) {
    for (const LoopSpec& l : loop_placements(geo, R, T, margin)) paths_.push_back(geo.loop_edge_steps(l));
    require_config(!paths_.empty(), "no " + std::to_string(R) + "x" + std::to_string(T) + " loop fits the box with margin " +
                                         std::to_string(margin));
  }

  int R() const { return R_; }
  int T() const { return T_; }
  std::size_t placements() const { return paths_.size(); }

  template <class G>
  Complex operator()(const GaugeField<G>& u) const {
    Complex acc(0.0, 0.0);
    for (const auto& p : paths_) acc += wilson_loop_value(u, std::span<const Step>(p));
    return acc / static_cast<double>(paths_.size());
  }

 private:
  int R_, T_;
  std::vector<std::vector<Step>> paths_;
};

/// Average of conj(phi_x) phi_{x + (R, 0)} over all x whose pair keeps
/// `margin` sites from every edge of the box.
class TwoPointAverage {
 public:
  TwoPointAverage(const LatticeGeometry& geo, int R, int margin) : R_(R) {
    require_config(geo.dim() == 2, "two-point averages need a 2D box");
    for (int s = 0; s < geo.num_sites(); ++s) {
      const Coord c = geo.coord(s);
      Coord y = c;
      y[0] += R;
      if (c[0] < margin || c[1] < margin || c[1] > geo.extent(1) - 1 - margin || y[0] > geo.extent(0) - 1 - margin) continue;
      pairs_.emplace_back(s, geo.site(y));
    }
    require_config(!pairs_.empty(), "no two-point pair at distance " + std::to_string(R) + " fits the box");
  }

  int R() const { return R_; }
  std::size_t pairs() const { return pairs_.size(); }

  Complex operator()(const SpinField& s) const {
    Complex acc(0.0, 0.0);
    for (const auto& [x, y] : pairs_) acc += two_point_value(s, x, y);
    return acc / static_cast<double>(pairs_.size());
  }

 private:
  int R_;
  std::vector<std::pair<int, int>> pairs_;
};

}  // namespace lgt
