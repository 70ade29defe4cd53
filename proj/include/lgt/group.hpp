#pragma once

// Compact gauge groups: U(1), U(n), and the finite oracle group Z_m.
//
// Each group is a small policy type (CircleGroup, CyclicGroup, UnitaryGroup)
// with a uniform interface used by the templated field and sampler code:
//
//   Element  identity(), compose(a, b), invert(a)
//   Complex  trace(a)           double re_trace(a)
//   Sum      zero_sum(), accumulate(sum, a)     (linear span, for staples)
//   double   re_trace_product(a, sum)           Re Tr(a * sum)
//   Element  haar(rng), propose(width, rng)
//   Element  central_multiply(a, angle)         e^{i angle} a
//
// GroupElement is the type-erased value used at API boundaries.

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lgt/error.hpp"
#include "lgt/rng.hpp"

namespace lgt {

using Complex = std::complex<double>;

inline constexpr int kMaxMatrixDim = 6;
using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor,
                             kMaxMatrixDim, kMaxMatrixDim>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle to (-pi, pi]. Inputs already in (-2pi, 2pi] take the fast path.
inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  if (a > pi) {
    a -= kTwoPi;
    if (a > pi) a = std::remainder(a, kTwoPi);
  } else if (a <= -pi) {
    a += kTwoPi;
    if (a <= -pi) a = std::remainder(a, kTwoPi);
  }
  if (a <= -pi) a = pi;
  return a;
}

/// Angle in [0, 2pi).
inline double positive_angle(double a) {
  double w = wrap_angle(a);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

class GroupId {
 public:
  enum class Kind { CircleU1, UnitaryN, CyclicZm };

  static GroupId circle() { return GroupId(Kind::CircleU1, 1, 0); }
  static GroupId unitary(int n) {
    require(n >= 1 && n <= kMaxMatrixDim, "U(n) requires 1 <= n <= " + std::to_string(kMaxMatrixDim));
    return GroupId(Kind::UnitaryN, n, 0);
  }
  static GroupId cyclic(int m) {
    require(m >= 2, "Z_m requires m >= 2");
    return GroupId(Kind::CyclicZm, 1, m);
  }

  /// Accepts "u1", "U(1)", "u2", "U(3)", "z8", "Z_8".
  static GroupId parse(std::string_view text) {
    std::string s;
    for (char c : text)
      if (c != '(' && c != ')' && c != '_' && c != ' ') s.push_back(static_cast<char>(std::tolower(c)));
    auto number = [&](std::size_t from) -> int {
      if (from >= s.size()) throw ConfigError("group '" + std::string(text) + "' is missing its size");
      for (std::size_t i = from; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
          throw ConfigError("cannot parse group '" + std::string(text) + "'");
      return std::stoi(s.substr(from));
    };
    if (s.size() >= 2 && s[0] == 'u') {
      const int n = number(1);
      if (n == 1) return circle();
      if (n < 1 || n > kMaxMatrixDim) throw ConfigError("unsupported U(n) size in '" + std::string(text) + "'");
      return unitary(n);
    }
    if (s.size() >= 2 && s[0] == 'z') {
      const int m = number(1);
      if (m < 2) throw ConfigError("Z_m requires m >= 2");
      return cyclic(m);
    }
    throw ConfigError("unknown group '" + std::string(text) + "' (expected u1, u<n>, or z<m>)");
  }

  Kind kind() const { return kind_; }
  /// Ambient matrix dimension n (1 for U(1) and Z_m).
  int n() const { return n_; }
  int m() const { return m_; }

  std::string name() const {
    switch (kind_) {
      case Kind::CircleU1: return "U(1)";
      case Kind::UnitaryN: return "U(" + std::to_string(n_) + ")";
      case Kind::CyclicZm: return "Z_" + std::to_string(m_);
    }
    return "?";
  }

  friend bool operator==(const GroupId&, const GroupId&) = default;

 private:
  GroupId(Kind k, int n, int m) : kind_(k), n_(n), m_(m) {}
  Kind kind_;
  int n_;
  int m_;
};

// ---------------------------------------------------------------------------
// Policies

/// U(1) with elements stored as angles in (-pi, pi]; the group law is exact
/// angle addition, so nothing drifts off the circle.
struct CircleGroup {
  using Element = double;
  using Sum = Complex;

  GroupId id() const { return GroupId::circle(); }
  int dim() const { return 1; }

  Element identity() const { return 0.0; }
  Element compose(Element a, Element b) const { return wrap_angle(a + b); }
  Element invert(Element a) const { return a == std::numbers::pi ? a : -a; }
  Complex trace(Element a) const { return std::polar(1.0, a); }
  double re_trace(Element a) const { return std::cos(a); }

  Sum zero_sum() const { return Complex(0.0, 0.0); }
  void accumulate(Sum& s, Element a) const { s += std::polar(1.0, a); }
  double re_trace_product(Element a, const Sum& s) const { return (std::polar(1.0, a) * s).real(); }

  Element haar(RngStream& rng) const { return wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi)); }
  /// Angle uniform on [-width, width].
  Element propose(double width, RngStream& rng) const {
    return wrap_angle(std::min(width, std::numbers::pi) * (2.0 * rng.uniform() - 1.0));
  }
  Element central_multiply(Element a, double angle) const { return wrap_angle(a + angle); }
  double phase_angle(Element a) const { return a; }
};

/// Z_m as the m-th roots of unity; elements are exact integers k in [0, m).
struct CyclicGroup {
  using Element = int;
  using Sum = Complex;

  explicit CyclicGroup(int order) : m(order), cos_table(order), sin_table(order) {
    require(order >= 2, "Z_m requires m >= 2");
    for (int k = 0; k < m; ++k) {
      cos_table[k] = std::cos(kTwoPi * k / m);
      sin_table[k] = std::sin(kTwoPi * k / m);
    }
  }

  int m;
  std::vector<double> cos_table;
  std::vector<double> sin_table;

  GroupId id() const { return GroupId::cyclic(m); }
  int dim() const { return 1; }

  Element identity() const { return 0; }
  Element compose(Element a, Element b) const {
    const int s = a + b;
    return s >= m ? s - m : s;
  }
  Element invert(Element a) const { return a == 0 ? 0 : m - a; }
  Complex trace(Element a) const { return {cos_table[a], sin_table[a]}; }
  double re_trace(Element a) const { return cos_table[a]; }

  Sum zero_sum() const { return Complex(0.0, 0.0); }
  void accumulate(Sum& s, Element a) const { s += trace(a); }
  double re_trace_product(Element a, const Sum& s) const { return (trace(a) * s).real(); }

  Element haar(RngStream& rng) const { return static_cast<int>(rng.below(static_cast<std::uint64_t>(m))); }
  /// Symmetric step of k in {-K..K}, K = clamp(round(width*m/2pi), 1, m/2).
  Element propose(double width, RngStream& rng) const {
    const int reach = std::clamp(static_cast<int>(std::lround(width * m / kTwoPi)), 1, m / 2);
    const int step = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * reach + 1))) - reach;
    return ((step % m) + m) % m;
  }
  /// The twist must lie on the Z_m grid, since the center of Z_m is Z_m itself.
  Element central_multiply(Element a, double angle) const { return compose(a, grid_index(angle)); }
  int grid_index(double angle) const {
    const double scaled = positive_angle(angle) * m / kTwoPi;
    const long k = std::lround(scaled);
    require(std::abs(scaled - static_cast<double>(k)) < 1e-9, "phase is not on the Z_m grid");
    return static_cast<int>(k % m);
  }
  double phase_angle(Element a) const { return wrap_angle(kTwoPi * a / m); }
};

/// U(n) with elements stored as n x n complex matrices.
struct UnitaryGroup {
  using Element = Matrix;
  using Sum = Matrix;

  explicit UnitaryGroup(int dimension) : n(dimension) {
    require(n >= 1 && n <= kMaxMatrixDim, "unsupported U(n) dimension");
  }

  int n;

  GroupId id() const { return GroupId::unitary(n); }
  int dim() const { return n; }

  Element identity() const { return Matrix::Identity(n, n); }
  Element compose(const Element& a, const Element& b) const { return a * b; }
  Element invert(const Element& a) const { return a.adjoint(); }
  Complex trace(const Element& a) const { return a.trace(); }
  double re_trace(const Element& a) const { return a.trace().real(); }

  Sum zero_sum() const { return Matrix::Zero(n, n); }
  void accumulate(Sum& s, const Element& a) const { s += a; }
  double re_trace_product(const Element& a, const Sum& s) const {
    // Re Tr(a s) without forming the product.
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) acc += (a(i, k) * s(k, i)).real();
    return acc;
  }

  /// Haar sample: complex Ginibre matrix, QR, then fix the phases of diag(R)
  /// so the distribution is exactly Haar.
  Element haar(RngStream& rng) const {
    Matrix z(n, n);
    const double s = std::sqrt(0.5);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) z(i, j) = Complex(s * rng.normal(), s * rng.normal());
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
      const Complex d = r(j, j);
      const double mag = std::abs(d);
      const Complex ph = mag > 0.0 ? d / mag : Complex(1.0, 0.0);
      q.col(j) *= ph;
    }
    return q;
  }

  /// exp(iH) with H = width (A + A^dagger)/2, A standard complex Gaussian.
  Element propose(double width, RngStream& rng) const {
    Matrix a(n, n);
    const double s = std::sqrt(0.5);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = Complex(s * rng.normal(), s * rng.normal());
    const Matrix h = (width * 0.5) * (a + a.adjoint());
    return exp_i_hermitian(h);
  }

  Element exp_i_hermitian(const Matrix& h) const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const auto& v = es.eigenvectors();
    Matrix d = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = std::polar(1.0, es.eigenvalues()(i));
    return v * d * v.adjoint();
  }

  Element central_multiply(const Element& a, double angle) const { return std::polar(1.0, angle) * a; }
};

/// Largest |(U^dagger U - I)_{ij}|.
inline double unitarity_residual(const Matrix& u) {
  const Matrix r = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
  double worst = 0.0;
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < r.cols(); ++j) worst = std::max(worst, std::abs(r(i, j)));
  return worst;
}

// ---------------------------------------------------------------------------
// Type-erased element

class GroupElement {
 public:
  static GroupElement phase(double angle) { return GroupElement(GroupId::circle(), wrap_angle(angle)); }
  static GroupElement cyclic(int m, int k) {
    require(m >= 2, "Z_m requires m >= 2");
    return GroupElement(GroupId::cyclic(m), ((k % m) + m) % m);
  }
  static GroupElement matrix(const Matrix& u) {
    require(u.rows() == u.cols() && u.rows() >= 1, "matrix element must be square");
    return GroupElement(GroupId::unitary(static_cast<int>(u.rows())), u);
  }
  static GroupElement identity(const GroupId& g) {
    switch (g.kind()) {
      case GroupId::Kind::CircleU1: return phase(0.0);
      case GroupId::Kind::CyclicZm: return cyclic(g.m(), 0);
      case GroupId::Kind::UnitaryN: return matrix(Matrix::Identity(g.n(), g.n()));
    }
    throw ContractViolation("unknown group");
  }

  const GroupId& group() const { return group_; }
  bool is_matrix() const { return std::holds_alternative<Matrix>(value_); }

  /// Phase angle in [0, 2pi) for U(1) and Z_m elements.
  double angle() const {
    if (auto* a = std::get_if<double>(&value_)) return positive_angle(*a);
    if (auto* k = std::get_if<int>(&value_)) return kTwoPi * (*k) / group_.m();
    throw ContractViolation("matrix element has no phase angle");
  }
  int cyclic_index() const {
    const int* k = std::get_if<int>(&value_);
    require(k != nullptr, "element is not in Z_m");
    return *k;
  }
  /// Matrix form. Phase elements become 1 x 1 matrices.
  Matrix as_matrix() const {
    if (auto* u = std::get_if<Matrix>(&value_)) return *u;
    Matrix one(1, 1);
    one(0, 0) = std::polar(1.0, angle());
    return one;
  }
  Complex trace() const {
    if (auto* u = std::get_if<Matrix>(&value_)) return u->trace();
    return std::polar(1.0, angle());
  }

  const auto& raw() const { return value_; }

  friend bool operator==(const GroupElement& a, const GroupElement& b) {
    return a.group_ == b.group_ && a.value_ == b.value_;
  }

 private:
  template <class V>
  GroupElement(GroupId g, V v) : group_(g), value_(std::move(v)) {}

  GroupId group_;
  std::variant<double, int, Matrix> value_;
};

inline GroupElement compose(const GroupElement& a, const GroupElement& b) {
  if (!(a.group() == b.group()))
    throw ContractViolation("compose: group mismatch (" + a.group().name() + " vs " + b.group().name() + ")");
  switch (a.group().kind()) {
    case GroupId::Kind::CircleU1:
      return GroupElement::phase(std::get<double>(a.raw()) + std::get<double>(b.raw()));
    case GroupId::Kind::CyclicZm:
      return GroupElement::cyclic(a.group().m(), std::get<int>(a.raw()) + std::get<int>(b.raw()));
    case GroupId::Kind::UnitaryN:
      return GroupElement::matrix(std::get<Matrix>(a.raw()) * std::get<Matrix>(b.raw()));
  }
  throw ContractViolation("unknown group");
}

inline GroupElement invert(const GroupElement& a) {
  switch (a.group().kind()) {
    case GroupId::Kind::CircleU1: return GroupElement::phase(CircleGroup{}.invert(std::get<double>(a.raw())));
    case GroupId::Kind::CyclicZm: return GroupElement::cyclic(a.group().m(), -std::get<int>(a.raw()));
    case GroupId::Kind::UnitaryN: return GroupElement::matrix(std::get<Matrix>(a.raw()).adjoint());
  }
  throw ContractViolation("unknown group");
}

/// Re Tr(a). A phase is read as the central element e^{i theta} I_n of U(ambient_n).
inline double re_trace(const GroupElement& a, int ambient_n = 1) {
  if (a.is_matrix()) return a.trace().real();
  return ambient_n * std::cos(a.angle());
}

/// The scalar matrix zI in U(n), z = e^{i angle}.
inline GroupElement embed_center(double angle, int n) {
  Matrix u = Matrix::Identity(n, n);
  u *= std::polar(1.0, angle);
  return GroupElement::matrix(u);
}

inline GroupElement haar_sample(const GroupId& g, RngStream& rng) {
  switch (g.kind()) {
    case GroupId::Kind::CircleU1: return GroupElement::phase(CircleGroup{}.haar(rng));
    case GroupId::Kind::CyclicZm: return GroupElement::cyclic(g.m(), CyclicGroup(g.m()).haar(rng));
    case GroupId::Kind::UnitaryN: return GroupElement::matrix(UnitaryGroup(g.n()).haar(rng));
  }
  throw ContractViolation("unknown group");
}

inline GroupElement proposal_near_identity(const GroupId& g, double width, RngStream& rng) {
  require(width >= 0.0 && std::isfinite(width), "proposal width must be finite and non-negative");
  switch (g.kind()) {
    case GroupId::Kind::CircleU1: return GroupElement::phase(CircleGroup{}.propose(width, rng));
    case GroupId::Kind::CyclicZm:
      // Z_m has no continuum near the identity; zero width means no move.
      if (width == 0.0) return GroupElement::cyclic(g.m(), 0);
      return GroupElement::cyclic(g.m(), CyclicGroup(g.m()).propose(width, rng));
    case GroupId::Kind::UnitaryN: return GroupElement::matrix(UnitaryGroup(g.n()).propose(width, rng));
  }
  throw ContractViolation("unknown group");
}

}  // namespace lgt
