#pragma once

#include <memory>
#include <vector>

#include "lgt/group.hpp"
#include "lgt/lattice.hpp"

namespace lgt {

/// Weighted XY system on a 2D box: one U(1) spin per site (stored as an
/// angle) and a complex coupling w_e per positively oriented edge, with
/// Gibbs density proportional to exp(sum_{e=(x,y)} Re(w_e phi_x conj(phi_y))).
///
/// `levels` = 0 means continuous U(1) spins; levels = m restricts spins to
/// the Z_m grid (enumeration-oracle comparisons only).
class SpinField {
 public:
  SpinField(std::shared_ptr<const LatticeGeometry> geometry, int levels = 0)
      : geometry_(std::move(geometry)), levels_(levels) {
    require_config(geometry_->dim() == 2, "weighted XY systems live on 2D boxes");
    require_config(levels_ == 0 || levels_ >= 2, "discrete spin levels must be >= 2");
    angles_.assign(geometry_->num_sites(), 0.0);
    couplings_.assign(geometry_->num_edges(), Complex(0.0, 0.0));
  }

  const LatticeGeometry& geometry() const { return *geometry_; }
  const std::shared_ptr<const LatticeGeometry>& geometry_ptr() const { return geometry_; }
  int levels() const { return levels_; }

  double angle(int site) const { return angles_[site]; }
  void set_angle(int site, double a) { angles_[site] = wrap_angle(a); }
  Complex spin(int site) const { return std::polar(1.0, angles_[site]); }
  const std::vector<double>& angles() const { return angles_; }

  Complex coupling(int edge) const { return couplings_[edge]; }
  void set_coupling(int edge, Complex w) {
    require(std::isfinite(w.real()) && std::isfinite(w.imag()), "couplings must be finite");
    couplings_[edge] = w;
  }
  void set_uniform_coupling(Complex w) {
    for (int e = 0; e < static_cast<int>(couplings_.size()); ++e) set_coupling(e, w);
  }
  const std::vector<Complex>& couplings() const { return couplings_; }

  /// L = 1 + max |w_e|.
  double coupling_scale() const {
    double worst = 0.0;
    for (const Complex& w : couplings_) worst = std::max(worst, std::abs(w));
    return 1.0 + worst;
  }

  /// Spin index on the Z_m grid (levels > 0 only).
  int level_index(int site) const {
    require(levels_ > 0, "continuous spins have no level index");
    const long k = std::lround(positive_angle(angles_[site]) * levels_ / kTwoPi);
    return static_cast<int>(k % levels_);
  }

  /// The exponent sum_e Re(w_e phi_x conj(phi_y)).
  double log_weight() const {
    double s = 0.0;
    for (int e = 0; e < geometry_->num_edges(); ++e)
      s += (couplings_[e] * spin(geometry_->edge_base_site(e)) * std::conj(spin(geometry_->edge_head_site(e)))).real();
    return s;
  }

  /// u such that the conditional density of phi_site is proportional to
  /// exp(Re(conj(u) phi)): out-edges contribute conj(w_e) phi_y, in-edges
  /// w_e phi_x.
  Complex local_field(int site) const {
    Complex u(0.0, 0.0);
    const LatticeGeometry& geo = *geometry_;
    for (int a = 0; a < 2; ++a) {
      const int out = geo.edge_id(site, a);
      if (out >= 0) u += std::conj(couplings_[out]) * spin(geo.edge_head_site(out));
    }
    const Coord c = geo.coord(site);
    for (int a = 0; a < 2; ++a) {
      if (c[a] == 0) continue;
      Coord b = c;
      --b[a];
      const int in = geo.edge_id(geo.site(b), a);
      u += couplings_[in] * spin(geo.edge_base_site(in));
    }
    return u;
  }

 private:
  std::shared_ptr<const LatticeGeometry> geometry_;
  int levels_;
  std::vector<double> angles_;
  std::vector<Complex> couplings_;
};

/// conj(phi_x) phi_y.
inline Complex two_point_value(const SpinField& s, int x, int y) {
  return std::polar(1.0, s.angle(y) - s.angle(x));
}

}  // namespace lgt
