#include <gtest/gtest.h>

#include "lgt/group.hpp"
#include "test_util.hpp"

using namespace lgt;
using std::numbers::pi;

TEST(Group, PhaseComposition) {
  const auto a = compose(GroupElement::phase(pi / 2), GroupElement::phase(pi / 2));
  EXPECT_NEAR(a.angle(), pi, 1e-15);
  const auto z = compose(GroupElement::cyclic(8, 3), GroupElement::cyclic(8, 7));
  EXPECT_EQ(z.cyclic_index(), 2);
  EXPECT_NEAR(z.angle(), kTwoPi * 2 / 8, 1e-15);
}

TEST(Group, InverseLaws) {
  RngStream rng(3, 0);
  const GroupElement u = haar_sample(GroupId::unitary(3), rng);
  const Matrix prod = compose(u, invert(u)).as_matrix();
  EXPECT_LT((prod - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(invert(invert(u)), u);

  EXPECT_NEAR(invert(GroupElement::phase(1.0)).angle(), kTwoPi - 1.0, 1e-15);
  EXPECT_EQ(invert(GroupElement::identity(GroupId::cyclic(5))), GroupElement::identity(GroupId::cyclic(5)));
  EXPECT_EQ(invert(GroupElement::identity(GroupId::unitary(2))), GroupElement::identity(GroupId::unitary(2)));
  // pi is its own inverse on the stored (-pi, pi] range
  EXPECT_EQ(CircleGroup{}.invert(pi), pi);
}

TEST(Group, TracesAndCenter) {
  EXPECT_DOUBLE_EQ(re_trace(GroupElement::identity(GroupId::unitary(3))), 3.0);
  EXPECT_DOUBLE_EQ(re_trace(GroupElement::phase(pi), 1), -1.0);
  EXPECT_NEAR(re_trace(GroupElement::phase(0.7), 3), 3 * std::cos(0.7), 1e-15);
  EXPECT_EQ(embed_center(0.0, 3), GroupElement::identity(GroupId::unitary(3)));
  const Matrix minus = embed_center(pi, 2).as_matrix();
  EXPECT_LT((minus + Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  for (int n = 1; n <= 4; ++n) EXPECT_NEAR(re_trace(embed_center(1.3, n)), n * std::cos(1.3), 1e-14);
}

TEST(Group, WrapAngle) {
  EXPECT_EQ(wrap_angle(pi), pi);
  EXPECT_EQ(wrap_angle(-pi), pi);
  EXPECT_NEAR(wrap_angle(3 * pi + 0.25), -pi + 0.25, 1e-13);
  EXPECT_NEAR(wrap_angle(-7.0), -7.0 + kTwoPi, 1e-15);
  EXPECT_NEAR(wrap_angle(1e6), std::remainder(1e6, kTwoPi), 1e-9);
}

TEST(Group, ParseNames) {
  EXPECT_EQ(GroupId::parse("U(1)"), GroupId::circle());
  EXPECT_EQ(GroupId::parse("u2"), GroupId::unitary(2));
  EXPECT_EQ(GroupId::parse("Z_8"), GroupId::cyclic(8));
  EXPECT_THROW(GroupId::parse("su2"), ConfigError);
  EXPECT_THROW(GroupId::parse("z1"), ConfigError);
  EXPECT_THROW(GroupId::parse("u"), ConfigError);
}

TEST(Group, CompositionMismatchThrows) {
  EXPECT_THROW(compose(GroupElement::phase(0.1), GroupElement::cyclic(4, 1)), ContractViolation);
}

TEST(Haar, CircleMeanVanishes) {
  RngStream rng(11, 0);
  const int n = 100000;
  Complex s(0, 0);
  for (int i = 0; i < n; ++i) s += std::polar(1.0, CircleGroup{}.haar(rng));
  s /= double(n);
  // each component has variance 1/2 per draw
  EXPECT_LT(std::abs(s.real()), 3 * std::sqrt(0.5 / n));
  EXPECT_LT(std::abs(s.imag()), 3 * std::sqrt(0.5 / n));
}

TEST(Haar, CircleUniformKs) {
  RngStream rng(12, 0);
  std::vector<double> x(100000);
  for (double& v : x) v = positive_angle(CircleGroup{}.haar(rng));
  const double d = gof::ks_statistic(x, [](double t) { return t / kTwoPi; });
  EXPECT_GT(gof::ks_pvalue(d, x.size()), 0.01);
}

TEST(Haar, U2TraceSecondMoment) {
  // int |Tr U|^2 dU = 1 on U(n).
  RngStream rng(13, 0);
  const UnitaryGroup g(2);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = std::norm(g.trace(g.haar(rng)));
    s += v;
    s2 += v * v;
  }
  const double mean = s / n, sd = std::sqrt(s2 / n - mean * mean);
  EXPECT_LT(std::abs(mean - 1.0), 3 * sd / std::sqrt(double(n)));
}

TEST(Haar, U1TraceSecondMomentIsExact) {
  RngStream rng(14, 0);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(std::norm(CircleGroup{}.trace(CircleGroup{}.haar(rng))), 1.0, 1e-15);
}

TEST(Haar, U3FirstMomentsVanish) {
  // E Tr U = 0 and E Tr U^2 = 0 for Haar on U(3).
  RngStream rng(15, 0);
  const UnitaryGroup g(3);
  const int n = 50000;
  Complex t1(0, 0), t2(0, 0);
  for (int i = 0; i < n; ++i) {
    const Matrix u = g.haar(rng);
    t1 += u.trace();
    t2 += (u * u).trace();
  }
  t1 /= double(n);
  t2 /= double(n);
  // Var Tr U = 1, Var Tr U^2 = 2 (complex, total).
  EXPECT_LT(std::abs(t1), 4 * std::sqrt(1.0 / n));
  EXPECT_LT(std::abs(t2), 4 * std::sqrt(2.0 / n));
}

TEST(Haar, UnitarityResidual) {
  RngStream rng(16, 0);
  for (int n = 1; n <= 4; ++n) {
    const UnitaryGroup g(n);
    for (int i = 0; i < 200; ++i) EXPECT_LT(unitarity_residual(g.haar(rng)), 1e-12);
  }
}

TEST(Haar, CyclicChiSquare) {
  RngStream rng(17, 0);
  const CyclicGroup g(8);
  std::vector<double> counts(8, 0.0);
  const int n = 80000;
  for (int i = 0; i < n; ++i) counts[g.haar(rng)] += 1;
  const auto [stat, dof] = gof::pearson(counts, std::vector<double>(8, 1.0 / 8), n);
  EXPECT_GT(gof::chi2_pvalue(stat, dof), 0.01);
}

TEST(Proposal, ZeroWidthIsIdentity) {
  RngStream rng(18, 0);
  EXPECT_NEAR(proposal_near_identity(GroupId::circle(), 0.0, rng).angle(), 0.0, 0.0);
  EXPECT_EQ(proposal_near_identity(GroupId::cyclic(6), 0.0, rng).cyclic_index(), 0);
  const Matrix u = proposal_near_identity(GroupId::unitary(3), 0.0, rng).as_matrix();
  EXPECT_LT((u - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  // small width stays close
  const Matrix v = proposal_near_identity(GroupId::unitary(2), 1e-8, rng).as_matrix();
  EXPECT_LT((v - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Proposal, CircleWidthIsUniformSymmetric) {
  RngStream rng(19, 0);
  const int n = 100000;
  const double w = 0.3;
  std::vector<double> x(n);
  double s = 0;
  for (double& v : x) {
    v = CircleGroup{}.propose(w, rng);
    ASSERT_LE(std::abs(v), w);
    s += v;
  }
  // uniform on [-w, w] has sd w/sqrt(3)
  EXPECT_LT(std::abs(s / n), 3 * w / std::sqrt(3.0 * n));
  const double d = gof::ks_statistic(x, [&](double t) { return (t + w) / (2 * w); });
  EXPECT_GT(gof::ks_pvalue(d, x.size()), 0.01);
}

TEST(Proposal, UnitaryExpIsUnitaryAndSymmetric) {
  RngStream rng(20, 0);
  const UnitaryGroup g(2);
  const int n = 20000;
  Complex tr_sum(0, 0);
  for (int i = 0; i < n; ++i) {
    const Matrix q = g.propose(0.8, rng);
    ASSERT_LT(unitarity_residual(q), 1e-10);
    tr_sum += q.trace();
  }
  // q and q^{-1} are equally likely, so E Im Tr q = 0.
  tr_sum /= double(n);
  EXPECT_LT(std::abs(tr_sum.imag()), 0.02);
}

TEST(Proposal, CyclicStepSymmetric) {
  RngStream rng(21, 0);
  const CyclicGroup g(8);
  std::vector<double> counts(8, 0.0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) counts[g.propose(2 * kTwoPi / 8, rng)] += 1;  // reach 2
  std::vector<double> p(8, 0.0);
  for (int k : {0, 1, 2, 6, 7}) p[k] = 0.2;
  for (int k : {3, 4, 5}) EXPECT_EQ(counts[k], 0.0);
  std::vector<double> c5, p5;
  for (int k : {0, 1, 2, 6, 7}) c5.push_back(counts[k]), p5.push_back(0.2);
  const auto [stat, dof] = gof::pearson(c5, p5, n);
  EXPECT_GT(gof::chi2_pvalue(stat, dof), 0.01);
}
