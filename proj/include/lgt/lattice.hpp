#pragma once

// Finite boxes in Z^d (d = 2, 3) with free boundary.
//
// Sites are numbered row-major (first coordinate slowest), which is also the
// lexicographic order. Edges are positively oriented (base -> base + e_axis)
// and numbered by (base site, axis), so a plain 0..E-1 loop is the
// lexicographic sweep. Plaquettes are numbered by (base site, i, j), i < j.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lgt/error.hpp"

namespace lgt {

using Coord = std::array<int, 3>;

struct Edge {
  Coord base{};
  int axis = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One step of a path: a positively oriented edge id, traversed with sign +1
/// (along its orientation) or -1 (against it).
struct Step {
  int edge = 0;
  int sign = 1;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Plaquette {
  Coord base{};
  int axis_i = 0;
  int axis_j = 1;
  friend bool operator==(const Plaquette&, const Plaquette&) = default;
};

/// Where an edge sits in a plaquette boundary.
struct Incidence {
  int plaquette = 0;
  int position = 0;  ///< index 0..3 in the boundary traversal
  int sign = 1;
};

/// Rectangle with side R along axis_a and T along axis_b, traversed
/// counterclockwise in the (axis_a, axis_b) plane starting at base.
struct LoopSpec {
  Coord base{};
  int axis_a = 0;
  int axis_b = 1;
  int R = 1;
  int T = 1;
};

class LatticeGeometry {
 public:
  LatticeGeometry(int d, std::vector<int> extents) : d_(d), extents_(std::move(extents)) {
    require_config(d_ == 2 || d_ == 3, "lattice dimension must be 2 or 3 (got " + std::to_string(d_) + ")");
    require_config(static_cast<int>(extents_.size()) == d_, "need exactly d extents");
    for (int e : extents_) require_config(e >= 2, "every extent must be >= 2 (got " + std::to_string(e) + ")");

    num_sites_ = 1;
    for (int a = d_ - 1; a >= 0; --a) {
      stride_[a] = num_sites_;
      num_sites_ *= extents_[a];
    }

    edge_of_.assign(static_cast<std::size_t>(num_sites_) * d_, -1);
    for (int s = 0; s < num_sites_; ++s) {
      const Coord c = coord(s);
      for (int a = 0; a < d_; ++a) {
        if (c[a] + 1 < extents_[a]) {
          edge_of_[static_cast<std::size_t>(s) * d_ + a] = static_cast<int>(edges_.size());
          edges_.push_back({c, a});
          edge_site_.push_back(s);
        }
      }
    }

    for (int s = 0; s < num_sites_; ++s) {
      const Coord c = coord(s);
      for (int i = 0; i < d_; ++i)
        for (int j = i + 1; j < d_; ++j)
          if (c[i] + 1 < extents_[i] && c[j] + 1 < extents_[j]) plaquettes_.push_back({c, i, j});
    }

    boundaries_.reserve(plaquettes_.size());
    std::vector<std::vector<Incidence>> inc(edges_.size());
    for (int p = 0; p < num_plaquettes(); ++p) {
      const auto b = compute_boundary(plaquettes_[p]);
      boundaries_.push_back(b);
      for (int k = 0; k < 4; ++k) inc[b[k].edge].push_back({p, k, b[k].sign});
    }
    incidence_offset_.push_back(0);
    for (const auto& v : inc) {
      incidence_.insert(incidence_.end(), v.begin(), v.end());
      incidence_offset_.push_back(static_cast<int>(incidence_.size()));
    }
  }

  int dim() const { return d_; }
  const std::vector<int>& extents() const { return extents_; }
  int extent(int axis) const { return extents_[axis]; }
  int num_sites() const { return num_sites_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_plaquettes() const { return static_cast<int>(plaquettes_.size()); }

  bool contains(const Coord& c) const {
    for (int a = 0; a < d_; ++a)
      if (c[a] < 0 || c[a] >= extents_[a]) return false;
    for (int a = d_; a < 3; ++a)
      if (c[a] != 0) return false;
    return true;
  }

  int site(const Coord& c) const {
    require(contains(c), "site outside the box");
    int s = 0;
    for (int a = 0; a < d_; ++a) s += c[a] * stride_[a];
    return s;
  }

  Coord coord(int site) const {
    Coord c{0, 0, 0};
    for (int a = 0; a < d_; ++a) {
      c[a] = site / stride_[a];
      site %= stride_[a];
    }
    return c;
  }

  /// Neighbor site index along +axis, or -1 outside the box.
  int neighbor(int site, int axis) const {
    const Coord c = coord(site);
    return c[axis] + 1 < extents_[axis] ? site + stride_[axis] : -1;
  }

  /// Edge id for (base site, axis), or -1 if the edge leaves the box.
  int edge_id(int site, int axis) const { return edge_of_[static_cast<std::size_t>(site) * d_ + axis]; }
  int edge_id(const Edge& e) const {
    require(e.axis >= 0 && e.axis < d_ && contains(e.base), "edge base outside the box");
    const int id = edge_id(site(e.base), e.axis);
    require(id >= 0, "edge leaves the box");
    return id;
  }
  const Edge& edge(int id) const { return edges_[id]; }
  int edge_base_site(int id) const { return edge_site_[id]; }
  int edge_head_site(int id) const { return edge_site_[id] + stride_[edges_[id].axis]; }

  const Plaquette& plaquette(int id) const { return plaquettes_[id]; }
  int plaquette_id(const Plaquette& p) const {
    const auto it = std::lower_bound(plaquettes_.begin(), plaquettes_.end(), p, [this](const Plaquette& a, const Plaquette& b) {
      const int sa = site(a.base), sb = site(b.base);
      if (sa != sb) return sa < sb;
      if (a.axis_i != b.axis_i) return a.axis_i < b.axis_i;
      return a.axis_j < b.axis_j;
    });
    require(it != plaquettes_.end() && *it == p, "no such plaquette in the box");
    return static_cast<int>(it - plaquettes_.begin());
  }

  /// Boundary x -> x+e_j -> x+e_i+e_j -> x+e_i -> x. With i < j, x is the
  /// lexicographically smallest vertex and x+e_j the second smallest.
  const std::array<Step, 4>& plaquette_boundary(int p) const { return boundaries_[p]; }

  std::span<const Incidence> incident_plaquettes(int edge) const {
    return {incidence_.data() + incidence_offset_[edge],
            static_cast<std::size_t>(incidence_offset_[edge + 1] - incidence_offset_[edge])};
  }

  bool loop_fits(const LoopSpec& l, int margin = 0) const {
    if (l.R < 1 || l.T < 1 || l.axis_a == l.axis_b) return false;
    if (l.axis_a < 0 || l.axis_a >= d_ || l.axis_b < 0 || l.axis_b >= d_) return false;
    for (int a = 0; a < d_; ++a) {
      const int span = a == l.axis_a ? l.R : (a == l.axis_b ? l.T : 0);
      if (l.base[a] < margin || l.base[a] + span > extents_[a] - 1 - margin) return false;
    }
    for (int a = d_; a < 3; ++a)
      if (l.base[a] != 0) return false;
    return true;
  }

  /// The 2(R+T) steps of a rectangular loop, counterclockwise in its plane.
  std::vector<Step> loop_edge_steps(const LoopSpec& l) const {
    require_config(loop_fits(l), "loop " + std::to_string(l.R) + "x" + std::to_string(l.T) + " exits the box");
    std::vector<Step> steps;
    steps.reserve(2 * (l.R + l.T));
    Coord c = l.base;
    auto forward = [&](int axis, int count) {
      for (int k = 0; k < count; ++k) {
        steps.push_back({edge_id(site(c), axis), +1});
        ++c[axis];
      }
    };
    auto backward = [&](int axis, int count) {
      for (int k = 0; k < count; ++k) {
        --c[axis];
        steps.push_back({edge_id(site(c), axis), -1});
      }
    };
    forward(l.axis_a, l.R);
    forward(l.axis_b, l.T);
    backward(l.axis_a, l.R);
    backward(l.axis_b, l.T);
    return steps;
  }

  /// Net displacement of a step sequence (zero for closed paths).
  Coord displacement(std::span<const Step> steps) const {
    Coord d{0, 0, 0};
    for (const Step& s : steps) d[edges_[s.edge].axis] += s.sign;
    return d;
  }

  friend bool operator==(const LatticeGeometry& a, const LatticeGeometry& b) {
    return a.d_ == b.d_ && a.extents_ == b.extents_;
  }

 private:
  std::array<Step, 4> compute_boundary(const Plaquette& p) const {
    const int x = site(p.base);
    const int i = p.axis_i, j = p.axis_j;
    const int xj = x + stride_[j];
    const int xi = x + stride_[i];
    return {Step{edge_id(x, j), +1}, Step{edge_id(xj, i), +1}, Step{edge_id(xi, j), -1}, Step{edge_id(x, i), -1}};
  }

  int d_;
  std::vector<int> extents_;
  std::array<int, 3> stride_{1, 1, 1};
  int num_sites_ = 0;
  std::vector<int> edge_of_;
  std::vector<Edge> edges_;
  std::vector<int> edge_site_;
  std::vector<Plaquette> plaquettes_;
  std::vector<std::array<Step, 4>> boundaries_;
  std::vector<Incidence> incidence_;
  std::vector<int> incidence_offset_;
};

inline LatticeGeometry build_box(int d, std::vector<int> extents) { return LatticeGeometry(d, std::move(extents)); }

}  // namespace lgt
