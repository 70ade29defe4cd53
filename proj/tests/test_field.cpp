#include <gtest/gtest.h>

#include "lgt/field.hpp"
#include "lgt/observables.hpp"

using namespace lgt;
using std::numbers::pi;

namespace {

auto box(std::vector<int> L) { return std::make_shared<const LatticeGeometry>(static_cast<int>(L.size()), L); }

template <class G>
GaugeField<G> random_field(std::vector<int> L, G g, std::uint64_t seed) {
  GaugeField<G> u(box(std::move(L)), g);
  RngStream rng(seed, 0);
  u.randomize(rng);
  return u;
}

template <class G>
std::vector<typename G::Element> random_gauge(const GaugeField<G>& u, std::uint64_t seed) {
  RngStream rng(seed, 1);
  std::vector<typename G::Element> g;
  for (int s = 0; s < u.geometry().num_sites(); ++s) g.push_back(u.group().haar(rng));
  return g;
}

}  // namespace

TEST(Model, ValidateRejectsOracleGroupByDefault) {
  EXPECT_THROW((ModelParams{GroupId::cyclic(4), 1.0, false}.validate()), ConfigError);
  EXPECT_NO_THROW((ModelParams{GroupId::cyclic(4), 1.0, true}.validate()));
  EXPECT_THROW((ModelParams{GroupId::circle(), -1.0}.validate()), ConfigError);
}

TEST(Model, IdentityField) {
  GaugeField<UnitaryGroup> u(box({3, 3, 3}), UnitaryGroup(2));
  EXPECT_EQ(wilson_action(u), 0.0);
  for (int p = 0; p < u.geometry().num_plaquettes(); ++p)
    EXPECT_EQ(plaquette_holonomy(u, p), Matrix::Identity(2, 2));
  const int e = u.geometry().edge_id({{1, 1, 1}, 2});
  EXPECT_LT((staple_sum(u, e) - 4.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(wilson_loop_value(u, LoopSpec{{0, 0, 0}, 0, 1, 2, 2}).real(), 2.0, 1e-15);
}

TEST(Model, SingleEdgePhase) {
  GaugeField<CircleGroup> u(box({2, 2}), CircleGroup{});
  const int e = u.geometry().edge_id({{0, 0, 0}, 1});  // first step of the plaquette
  u[e] = 0.4;
  EXPECT_NEAR(plaquette_holonomy(u, 0), 0.4, 1e-15);
  EXPECT_NEAR(wilson_action(u), 1 - std::cos(0.4), 1e-15);
  u.set_identity();
  u[u.geometry().edge_id({{0, 0, 0}, 0})] = 0.4;  // traversed backwards
  EXPECT_NEAR(plaquette_holonomy(u, 0), -0.4, 1e-15);
}

TEST(Model, ActionMatchesHolonomySum) {
  const auto u = random_field({3, 4, 3}, UnitaryGroup(3), 1);
  double s = 0;
  for (int p = 0; p < u.geometry().num_plaquettes(); ++p) s += 3.0 - plaquette_holonomy(u, p).trace().real();
  EXPECT_NEAR(wilson_action(u), s, 1e-9);
}

TEST(Model, StapleDecomposition) {
  const auto u = random_field({4, 3, 3}, UnitaryGroup(2), 2);
  const auto& geo = u.geometry();
  double total = 0;
  for (int p = 0; p < geo.num_plaquettes(); ++p) total += plaquette_holonomy(u, p).trace().real();
  for (int e = 0; e < geo.num_edges(); e += 5) {
    std::vector<bool> touches(geo.num_plaquettes(), false);
    for (const auto& inc : geo.incident_plaquettes(e)) touches[inc.plaquette] = true;
    double rest = 0;
    for (int p = 0; p < geo.num_plaquettes(); ++p)
      if (!touches[p]) rest += plaquette_holonomy(u, p).trace().real();
    EXPECT_NEAR(u.group().re_trace_product(u[e], staple_sum(u, e)) + rest, total, 1e-9);
  }
}

TEST(Model, BoundaryStapleIsOneProduct) {
  const auto u = random_field({2, 2}, UnitaryGroup(2), 3);
  const int e = u.geometry().edge_id({{0, 0, 0}, 1});
  // position 0 in the single plaquette: staple = U2 U3 U4 along the boundary
  const auto& b = u.geometry().plaquette_boundary(0);
  ASSERT_EQ(b[0].edge, e);
  const Matrix want = u.along(b[1]) * u.along(b[2]) * u.along(b[3]);
  EXPECT_LT((staple_sum(u, e) - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Model, LocalDeltaMatchesGlobal) {
  auto u = random_field({4, 4, 4}, UnitaryGroup(2), 4);
  RngStream rng(99, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const int e = static_cast<int>(rng.below(u.num_edges()));
    const Matrix cand = u.group().haar(rng);
    EXPECT_EQ(local_action_delta(u, e, u[e]), 0.0);
    const double before = wilson_action(u);
    const double ds = local_action_delta(u, e, cand);
    u[e] = cand;
    EXPECT_NEAR(wilson_action(u) - before, ds, 1e-9);
  }
}

TEST(Model, LocalDeltaCircleAndCyclic) {
  auto c = random_field({5, 4}, CircleGroup{}, 5);
  auto z = random_field({3, 3, 3}, CyclicGroup(6), 6);
  RngStream rng(7, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int e = static_cast<int>(rng.below(c.num_edges()));
    const double cand = c.group().haar(rng);
    const double before = wilson_action(c);
    const double ds = local_action_delta(c, e, cand);
    c[e] = cand;
    EXPECT_NEAR(wilson_action(c) - before, ds, 1e-9);

    const int f = static_cast<int>(rng.below(z.num_edges()));
    const int k = z.group().haar(rng);
    const double zb = wilson_action(z);
    const double dz = local_action_delta(z, f, k);
    z[f] = k;
    EXPECT_NEAR(wilson_action(z) - zb, dz, 1e-9);
  }
}

TEST(Model, GaugeInvariance) {
  const auto u = random_field({3, 3, 3}, UnitaryGroup(2), 8);
  const auto g = random_gauge(u, 8);
  const auto v = gauge_transform(u, std::span<const Matrix>(g));
  EXPECT_NEAR(wilson_action(v), wilson_action(u), 1e-9);
  const auto& geo = u.geometry();
  for (int p = 0; p < geo.num_plaquettes(); ++p) {
    // U_p is conjugated by g at its base vertex
    const int x = geo.site(geo.plaquette(p).base);
    const Matrix want = g[x] * plaquette_holonomy(u, p) * g[x].adjoint();
    EXPECT_LT((plaquette_holonomy(v, p) - want).cwiseAbs().maxCoeff(), 1e-12);
  }
  const LoopSpec l{{0, 0, 1}, 0, 1, 2, 2};
  EXPECT_NEAR(std::abs(wilson_loop_value(v, l)), std::abs(wilson_loop_value(u, l)), 1e-9);
  EXPECT_NEAR(wilson_loop_value(v, l).real(), wilson_loop_value(u, l).real(), 1e-9);

  std::vector<Matrix> ident(geo.num_sites(), Matrix::Identity(2, 2));
  const auto same = gauge_transform(u, std::span<const Matrix>(ident));
  for (int e = 0; e < u.num_edges(); ++e) EXPECT_EQ(same[e], u[e]);
}

TEST(Model, LoopTraceFacts) {
  const auto u = random_field({4, 4}, UnitaryGroup(3), 9);
  const auto& geo = u.geometry();
  auto steps = geo.loop_edge_steps({{0, 0, 0}, 0, 1, 2, 3});
  const Complex w = wilson_loop_value(u, std::span<const Step>(steps));
  // base-point shift
  std::rotate(steps.begin(), steps.begin() + 3, steps.end());
  EXPECT_NEAR(std::abs(wilson_loop_value(u, std::span<const Step>(steps)) - w), 0.0, 1e-12);
  // reversal conjugates
  std::vector<Step> rev(steps.rbegin(), steps.rend());
  for (auto& s : rev) s.sign = -s.sign;
  EXPECT_NEAR(std::abs(wilson_loop_value(u, std::span<const Step>(rev)) - std::conj(w)), 0.0, 1e-12);
}

TEST(Model, CentralFieldLoop) {
  // U(e) = z_e I gives n times the product of phases.
  GaugeField<UnitaryGroup> u(box({3, 3}), UnitaryGroup(2));
  RngStream rng(10, 0);
  std::vector<double> phase(u.num_edges());
  for (int e = 0; e < u.num_edges(); ++e) {
    phase[e] = rng.uniform(-pi, pi);
    u[e] = embed_center(phase[e], 2).as_matrix();
  }
  const auto steps = u.geometry().loop_edge_steps({{0, 0, 0}, 0, 1, 2, 2});
  double a = 0;
  for (const Step& s : steps) a += s.sign * phase[s.edge];
  EXPECT_NEAR(std::abs(wilson_loop_value(u, std::span<const Step>(steps)) - 2.0 * std::polar(1.0, a)), 0.0, 1e-12);
}

TEST(Model, TwistIdentities) {
  const auto u = random_field({3, 3, 3}, UnitaryGroup(2), 11);
  const auto& geo = u.geometry();
  const auto trivial = CentralTwist::trivial(geo);
  for (int p = 0; p < geo.num_plaquettes(); ++p)
    EXPECT_LT((twisted_holonomy(u, trivial, p) - plaquette_holonomy(u, p)).cwiseAbs().maxCoeff(), 1e-15);

  RngStream rng(12, 0);
  CentralTwist xi{std::vector<double>(geo.num_edges())};
  for (double& a : xi.angles) a = rng.uniform(-pi, pi);

  GaugeField<UnitaryGroup> one(u.geometry_ptr(), UnitaryGroup(2));
  for (int p = 0; p < geo.num_plaquettes(); ++p) {
    const Matrix want = embed_center(twist_plaquette_angle(geo, xi, p), 2).as_matrix();
    EXPECT_LT((twisted_holonomy(one, xi, p) - want).cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_NEAR(wilson_action(absorb_twist(u, xi)), twisted_action(u, xi), 1e-9);
}

TEST(Model, TwistOnCyclicGrid) {
  const auto u = random_field({3, 3}, CyclicGroup(8), 13);
  CentralTwist xi{std::vector<double>(u.num_edges())};
  for (int e = 0; e < u.num_edges(); ++e) xi.angles[e] = kTwoPi * ((3 * e) % 8) / 8;
  EXPECT_NEAR(wilson_action(absorb_twist(u, xi)), twisted_action(u, xi), 1e-12);
  CentralTwist off{std::vector<double>(u.num_edges(), 0.1)};
  EXPECT_THROW(absorb_twist(u, off), ContractViolation);
}
