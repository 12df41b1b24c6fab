#include <gtest/gtest.h>

#include <cmath>

#include "shearlab/shear.hpp"

using namespace shearlab;

TEST(ShearProfile, KolmogorovConstants) {
  const auto p = ShearProfile::kolmogorov();
  EXPECT_NEAR(p.sup_dv(), 1.0, 1e-10);
  EXPECT_NEAR(p.c_inf(), 3.0, 1e-10);
  EXPECT_TRUE(p.simple());
  EXPECT_EQ(p.max_order(), 2);
}

TEST(ShearProfile, SampledDerivativesMatchSpectral) {
  for (const auto& p : {ShearProfile::kolmogorov(), ShearProfile::two_mode(0.5)}) {
    const PeriodicGrid g(256);
    const auto sp = p.sample(g);
    std::vector<Complex> v(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) v[j] = sp.v[j];
    const ComplexField f(g, v, 1);
    const auto d1 = spectral_derivative(f, 1), d2 = spectral_derivative(f, 2);
    for (std::size_t j = 0; j < g.size(); ++j) {
      EXPECT_NEAR(d1[j].real(), sp.dv[j], 1e-8);
      EXPECT_NEAR(d2[j].real(), sp.d2v[j], 1e-8);
    }
  }
}

TEST(CriticalPoints, Kolmogorov) {
  const auto p = ShearProfile::kolmogorov();
  for (int res : {64, 100, 256, 4096}) {
    const auto cps = detect_critical_points(p, res);
    ASSERT_EQ(cps.size(), 2u) << res;
    EXPECT_NEAR(cps[0].y, 0.0, 1e-9);
    EXPECT_NEAR(cps[1].y, M_PI, 1e-9);
    for (const auto& c : cps) {
      EXPECT_EQ(c.order, 2);
      EXPECT_FALSE(c.degenerate);
      EXPECT_LE(std::abs(p.dv(c.y)), 1e-10);
    }
  }
}

TEST(CriticalPoints, ConstantProfileRejected) {
  const ShearProfile flat("flat", [](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; });
  EXPECT_THROW(detect_critical_points(flat, 256), UnsupportedError);
  EXPECT_FALSE(flat.isolated_critical_points());
}

TEST(CriticalPoints, ResolutionTooLow) {
  EXPECT_THROW(detect_critical_points(ShearProfile::kolmogorov(), 32), DomainError);
}

TEST(CriticalPoints, TwoModeMatchesBruteForce) {
  // v = sin y + 0.5 sin 2y: roots of cos y + cos 2y. The double root at pi
  // is degenerate and carries no sign change; the grid avoids landing on it.
  const auto p = ShearProfile::two_mode(0.5);
  const auto cps = detect_critical_points(p, 4096);
  int sign_changes = 0;
  const int n = 4096;
  for (int j = 0; j < n; ++j) {
    const double a = p.dv(kTwoPi * (j + 0.5) / n), b = p.dv(kTwoPi * (j + 1.5) / n);
    if ((a < 0) != (b < 0)) ++sign_changes;
  }
  std::size_t simple = 0;
  for (const auto& c : cps) {
    EXPECT_LE(std::abs(p.dv(c.y)), 1e-10);
    if (!c.degenerate) ++simple;
  }
  EXPECT_EQ(simple, 2u);
  EXPECT_EQ(static_cast<int>(simple), sign_changes);
}

TEST(CriticalPoints, DegenerateFlagged) {
  // v = cos y - cos(2y)/4: v' = -sin y + sin(2y)/2 vanishes to third order at y = 0.
  const ShearProfile p(
      "flat_zero", [](double y) { return std::cos(y) - std::cos(2 * y) / 4; },
      [](double y) { return -std::sin(y) + std::sin(2 * y) / 2; },
      [](double y) { return -std::cos(y) + std::cos(2 * y); });
  EXPECT_FALSE(p.simple());
  bool found = false;
  for (const auto& c : p.critical_points()) {
    if (std::abs(c.y) < 1e-3 || std::abs(c.y - kTwoPi) < 1e-3) {
      found = true;
      EXPECT_TRUE(c.degenerate);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_THROW(estimate_spectral_gap_constant(p, default_sigma_grid(), 100), UnsupportedError);
}

TEST(Tabulated, ReproducesCosine) {
  std::vector<double> s(64);
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = std::cos(kTwoPi * j / 64);
  const auto p = ShearProfile::tabulated(s);
  for (double y : {0.1, 1.3, 2.9, 5.5}) {
    EXPECT_NEAR(p.v(y), std::cos(y), 1e-12);
    EXPECT_NEAR(p.dv(y), -std::sin(y), 1e-11);
    EXPECT_NEAR(p.d2v(y), -std::cos(y), 1e-10);
  }
  EXPECT_NEAR(p.c_inf(), 3.0, 1e-9);
  EXPECT_EQ(p.critical_points().size(), 2u);
}

TEST(SpectralGap, SingleModeRatioAtMost1) {
  const auto p = ShearProfile::kolmogorov();
  const PeriodicGrid g(256);
  const auto sp = p.sample(g);
  const double r = *spectral_gap_ratio(ComplexField::single_mode(g, 1, 1), sp, 1.0);
  EXPECT_LE(r, 1.0);
  // 2 pi / (2 pi + pi).
  EXPECT_NEAR(r, 2.0 / 3.0, 1e-12);
}

TEST(SpectralGap, BumpAwayFromCriticalPointBounded) {
  const auto p = ShearProfile::kolmogorov();
  const PeriodicGrid g(256);
  const auto sp = p.sample(g);
  const auto bump = ComplexField::from_function(g, 1, [](double y) {
    const double d = y - M_PI / 2;
    return Complex(std::exp(-d * d / 0.05), 0);
  });
  double prev = 0;
  for (double s : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double r = *spectral_gap_ratio(bump, sp, s);
    const double limit = std::sqrt(s) * l2_norm_squared(bump) / l2_norm_squared(bump.multiplied(sp.dv));
    EXPECT_LE(r, limit * (1 + 1e-12));
    EXPECT_LT(r, 1.0);
    prev = r;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(SpectralGap, ZeroFieldSkipped) {
  const auto p = ShearProfile::kolmogorov();
  const PeriodicGrid g(64);
  EXPECT_FALSE(spectral_gap_ratio(ComplexField::zero(g, 1), p.sample(g), 0.1).has_value());
}

TEST(SpectralGap, EstimateAtLeastOneAndMonotoneInTrials) {
  const auto p = ShearProfile::kolmogorov();
  const double a = estimate_spectral_gap_constant(p, default_sigma_grid(), 100);
  const double b = estimate_spectral_gap_constant(p, default_sigma_grid(), 400);
  EXPECT_GE(a, 1.0);
  EXPECT_GE(b, a);
  EXPECT_THROW(estimate_spectral_gap_constant(p, default_sigma_grid(), 50), DomainError);
}
