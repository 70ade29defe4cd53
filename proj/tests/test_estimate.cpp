#include <gtest/gtest.h>

#include "lgt/estimate.hpp"
#include "lgt/rng.hpp"

using namespace lgt;

namespace {

std::vector<Complex> ar1(double phi, int n, RngStream& rng) {
  std::vector<Complex> x(n);
  // stationary start
  Complex v(rng.normal(), rng.normal());
  v /= std::sqrt(1 - phi * phi);
  for (int i = 0; i < n; ++i) {
    v = phi * v + Complex(rng.normal(), rng.normal());
    x[i] = v;
  }
  return x;
}

}  // namespace

TEST(Estimator, IidErrorsAndTau) {
  RngStream rng(1, 0);
  const int n = 4096, reps = 100;
  double ratio = 0, tau = 0;
  for (int r = 0; r < reps; ++r) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = Complex(rng.normal(), rng.normal());
    const auto e = estimate(std::span<const Complex>(x));
    ratio += e.std_error / std::sqrt(2.0 / n);  // complex unit-variance components
    tau += e.tau_int;
  }
  EXPECT_NEAR(ratio / reps, 1.0, 0.2);
  EXPECT_NEAR(tau / reps, 0.5, 0.1);
}

TEST(Estimator, Ar1Tau) {
  RngStream rng(2, 0);
  const auto x = ar1(0.9, 200000, rng);
  const auto t = integrated_autocorrelation(std::span<const Complex>(x));
  EXPECT_TRUE(t.converged);
  EXPECT_NEAR(t.tau, 9.5, 0.3 * 9.5);
}

TEST(Estimator, Ar1Coverage) {
  RngStream rng(3, 0);
  int covered = 0;
  for (int r = 0; r < 100; ++r) {
    const auto x = ar1(0.9, 20000, rng);
    std::vector<Complex> re(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) re[i] = x[i].real();
    const auto e = estimate(std::span<const Complex>(re));
    if (std::abs(e.mean.real()) <= e.std_error) ++covered;
  }
  EXPECT_GE(covered, 58);
  EXPECT_LE(covered, 78);
}

TEST(Estimator, ConstantSeries) {
  std::vector<Complex> x(100, Complex(0.25, -1.5));
  const auto e = estimate(std::span<const Complex>(x));
  EXPECT_NEAR(std::abs(e.mean - Complex(0.25, -1.5)), 0.0, 1e-15);
  EXPECT_LT(e.std_error, 1e-13);
  EXPECT_LT(e.abs_stderr, 1e-13);
  EXPECT_EQ(e.tau_int, 0.5);
}

TEST(Estimator, TooShort) {
  std::vector<Complex> x(10, Complex(1, 0));
  EXPECT_THROW(estimate(std::span<const Complex>(x)), ConfigError);
}

TEST(Estimator, BinRule) {
  EXPECT_EQ(choose_bin_size(6400, 0.5), 100);
  EXPECT_EQ(choose_bin_size(640, 9.5), 19);
  EXPECT_EQ(choose_bin_size(64, 0.5), 1);
}

TEST(Estimator, JackknifeOfRatio) {
  // jackknife of a ratio of means of two independent series
  RngStream rng(4, 0);
  const int n = 20000;
  std::vector<Complex> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = 2.0 + 0.1 * rng.normal();
    b[i] = 4.0 + 0.1 * rng.normal();
  }
  const std::span<const Complex> both[] = {a, b};
  const auto j = jackknife(std::span<const std::span<const Complex>>(both), 100,
                           [](std::span<const Complex> m) { return m[0].real() / m[1].real(); });
  EXPECT_NEAR(j.value, 0.5, 1e-3);
  // delta method: 0.5 * sqrt((0.1/2)^2 + (0.1/4)^2) / sqrt(n)
  const double want = 0.5 * std::sqrt(0.0025 + 0.000625) / std::sqrt(double(n));
  EXPECT_NEAR(j.error / want, 1.0, 0.25);
}

TEST(Estimator, AbsStderrMatchesComponentForRealSeries) {
  RngStream rng(5, 0);
  std::vector<Complex> x(5000);
  for (auto& v : x) v = 3.0 + rng.normal();
  const auto e = estimate(std::span<const Complex>(x));
  EXPECT_NEAR(e.abs_stderr, e.std_error, 1e-12);
}

// ---------------------------------------------------------------------------

TEST(LoopTable, CensoringRule) {
  const auto a = make_loop_entry(0.02, 0.01, 2.0);
  EXPECT_TRUE(a.censored);
  EXPECT_DOUBLE_EQ(a.upper, 0.025);
  const auto b = make_loop_entry(0.031, 0.01, 1.0);
  EXPECT_FALSE(b.censored);
  EXPECT_DOUBLE_EQ(b.value, 0.031);
}

namespace {

LoopTable synthetic(const std::function<double(int, int)>& w, int max = 4, double rel_err = 1e-4) {
  LoopTable t;
  for (int R = 1; R <= max; ++R)
    for (int T = R; T <= max; ++T) t[{R, T}] = make_loop_entry(w(R, T), rel_err * w(R, T), 1.0);
  return t;
}

}  // namespace

TEST(LoopTable, FreeLimit) {
  const auto v = effective_potential(synthetic([](int, int) { return 1.0; }));
  for (const auto& p : v) EXPECT_NEAR(p.V, 0.0, 1e-15);
}

TEST(LoopTable, AreaLawPotential) {
  const double sigma = 0.3;
  const auto v = effective_potential(synthetic([&](int R, int T) { return std::exp(-sigma * R * T); }, 6));
  ASSERT_FALSE(v.empty());
  for (const auto& p : v) {
    EXPECT_NEAR(p.V, sigma * p.R, 0.01 * sigma * p.R);
    if (p.slope_valid) EXPECT_NEAR(p.slope, sigma * p.R, 0.01 * sigma * p.R);
  }
}

TEST(LoopTable, PerimeterLawPotential) {
  const double c = 0.2;
  // keys need R <= T; symmetric law so lookup by (R, T) is consistent
  LoopTable t;
  for (int R = 1; R <= 3; ++R)
    for (int T = R; T <= 40; ++T) t[{R, T}] = make_loop_entry(std::exp(-c * (R + T)), 1e-6, 1.0);
  for (const auto& p : effective_potential(t)) {
    EXPECT_NEAR(p.slope, c, 1e-6);
    EXPECT_NEAR(p.V, c, 0.05 * c * 2);  // (R + T)/T -> 1 as T grows
  }
}

TEST(LoopTable, CreutzRatios) {
  const auto area = synthetic([](int R, int T) { return std::exp(-0.3 * R * T); });
  const auto c = creutz_ratio(area, 3, 3);
  EXPECT_FALSE(c.censored);
  EXPECT_NEAR(c.chi, 0.3, 1e-12);
  const auto perim = synthetic([](int R, int T) { return std::exp(-0.2 * (R + T)); });
  EXPECT_NEAR(creutz_ratio(perim, 2, 4).chi, 0.0, 1e-12);
  LoopTable gap = area;
  gap[{2, 3}].censored = true;
  EXPECT_TRUE(creutz_ratio(gap, 3, 3).censored);
}
