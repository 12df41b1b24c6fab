#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "shearlab/fields.hpp"
#include "shearlab/random.hpp"

using namespace shearlab;

namespace {

ComplexField random_field(const PeriodicGrid& g, std::uint64_t seed, int band) {
  const CounterRng rng(seed, 3);
  std::vector<Complex> c(g.size());
  std::uint64_t ctr = 0;
  for (int n = -band; n <= band; ++n) {
    const std::size_t slot = n >= 0 ? static_cast<std::size_t>(n) : g.size() - static_cast<std::size_t>(-n);
    const double re = rng.normal(ctr++);
    c[slot] = Complex(re, rng.normal(ctr++));
  }
  return ComplexField::from_coefficients(g, 1, c);
}

}  // namespace

TEST(PeriodicGrid, RejectsTooFewPoints) { EXPECT_THROW(PeriodicGrid(4), DomainError); }

TEST(PeriodicGrid, PointsAndWavenumbers) {
  const PeriodicGrid g(16);
  EXPECT_DOUBLE_EQ(g.point(4), kTwoPi * 4 / 16);
  EXPECT_EQ(g.wavenumber(0), 0);
  EXPECT_EQ(g.wavenumber(7), 7);
  EXPECT_EQ(g.wavenumber(8), -8);
  EXPECT_EQ(g.wavenumber(15), -1);
}

TEST(ComplexField, RejectsZeroWavenumber) {
  const PeriodicGrid g(8);
  EXPECT_THROW(ComplexField::zero(g, 0), DomainError);
}

TEST(SpectralDerivative, ExponentialFirstOrder) {
  const PeriodicGrid g(32);
  const auto f = ComplexField::single_mode(g, 1, 1);
  const auto d = spectral_derivative(f, 1);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_LT(std::abs(d[j] - Complex(0, 1) * f[j]), 1e-13);
}

TEST(SpectralDerivative, ConstantGivesZero) {
  const PeriodicGrid g(32);
  const auto f = ComplexField::from_function(g, 1, [](double) { return Complex(2.5, -1.0); });
  const auto d = spectral_derivative(f, 1);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_LT(std::abs(d[j]), 1e-13);
}

TEST(SpectralDerivative, CosineSecondOrder) {
  const PeriodicGrid g(64);
  const auto f = ComplexField::from_function(g, 1, [](double y) { return Complex(std::cos(3 * y), 0); });
  const auto d = spectral_derivative(f, 2);
  double err = 0;
  for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(d[j] + 9.0 * std::cos(3 * g.point(j))));
  EXPECT_LE(err, 9.0 * 1e-12);
}

TEST(SpectralDerivative, RejectsBadOrder) {
  const PeriodicGrid g(16);
  const auto f = ComplexField::single_mode(g, 1, 1);
  EXPECT_THROW(spectral_derivative(f, 0), DomainError);
  EXPECT_THROW(spectral_derivative(f, 3), DomainError);
}

TEST(SpectralDerivative, ComposesToSecondOrder) {
  const PeriodicGrid g(64);
  const auto f = random_field(g, 5, 12);
  const auto d11 = spectral_derivative(spectral_derivative(f, 1), 1);
  const auto d2 = spectral_derivative(f, 2);
  double err = 0, ref = 0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    err = std::max(err, std::abs(d11[j] - d2[j]));
    ref = std::max(ref, std::abs(d2[j]));
  }
  EXPECT_LE(err / ref, 1e-10);
}

TEST(L2Inner, Examples) {
  const PeriodicGrid g(32);
  const auto e1 = ComplexField::single_mode(g, 1, 1);
  const auto e2 = ComplexField::single_mode(g, 1, 2);
  EXPECT_NEAR(l2_inner(e1, e1).real(), kTwoPi, 1e-13);
  EXPECT_LE(std::abs(l2_inner(e1, e2)), 1e-14);
  const auto c = ComplexField::from_function(g, 1, [](double y) { return Complex(std::cos(y), 0); });
  const auto s = ComplexField::from_function(g, 1, [](double y) { return Complex(std::sin(y), 0); });
  EXPECT_LE(std::abs(l2_inner(c, s)), 1e-14);
}

TEST(L2Inner, ConjugateSymmetric) {
  const PeriodicGrid g(32);
  const auto f = random_field(g, 1, 6), h = random_field(g, 2, 6);
  EXPECT_LT(std::abs(l2_inner(f, h) - std::conj(l2_inner(h, f))), 1e-12);
}

TEST(L2Inner, GridMismatch) {
  const auto f = ComplexField::single_mode(PeriodicGrid(16), 1, 1);
  const auto h = ComplexField::single_mode(PeriodicGrid(32), 1, 1);
  EXPECT_THROW(l2_inner(f, h), DomainError);
}

TEST(L2Inner, Parseval) {
  const PeriodicGrid g(64);
  const auto f = random_field(g, 9, 20);
  double s = 0;
  for (const auto& c : f.coefficients()) s += std::norm(c);
  EXPECT_NEAR(l2_inner(f, f).real() / (kTwoPi * s), 1.0, 1e-12);
}

TEST(SobolevNorm, SingleModeExamples) {
  const PeriodicGrid g(64);
  const auto e1 = ComplexField::single_mode(g, 1, 1);
  EXPECT_NEAR(sobolev_norm(e1, 0), std::sqrt(kTwoPi), 1e-13);
  EXPECT_NEAR(sobolev_norm(e1, -1), std::sqrt(M_PI), 1e-13);
  double prev = 1e300;
  for (int n = 1; n <= 20; ++n) {
    const double v = sobolev_norm(ComplexField::single_mode(g, 1, n), -1);
    EXPECT_NEAR(v, std::sqrt(kTwoPi / (1.0 + n * n)), 1e-13);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(SobolevNorm, RejectsUnsupportedIndex) {
  const auto f = ComplexField::single_mode(PeriodicGrid(16), 1, 1);
  EXPECT_THROW(sobolev_norm(f, 0.5), DomainError);
  EXPECT_THROW(sobolev_norm(f, 2), DomainError);
}

TEST(SobolevNorm, Monotone) {
  const PeriodicGrid g(64);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = random_field(g, seed, 15);
    EXPECT_LE(sobolev_norm(f, -1), sobolev_norm(f, 0));
    EXPECT_LE(sobolev_norm(f, 0), sobolev_norm(f, 1));
  }
}

TEST(SobolevNorm, NegativeNormOfDerivativeBounded) {
  const PeriodicGrid g(64);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = random_field(g, seed + 100, 15);
    EXPECT_LE(sobolev_norm(spectral_derivative(f, 1), -1), sobolev_norm(f, 0) * (1 + 1e-14));
  }
}

TEST(CounterRng, Deterministic) {
  const CounterRng a(42, 1), b(42, 1), c(43, 1);
  EXPECT_EQ(a.bits(10), b.bits(10));
  EXPECT_NE(a.bits(10), c.bits(10));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = a.uniform(i);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
