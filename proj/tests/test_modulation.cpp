#include <gtest/gtest.h>

#include <cmath>

#include "shearlab/energetics.hpp"
#include "shearlab/modulation.hpp"
#include "shearlab/random.hpp"

using namespace shearlab;

namespace {

BuiltinParams nu_only(double nu) { return {nu, std::nullopt, std::nullopt}; }

}  // namespace

TEST(Modulation, EvalExamples) {
  EXPECT_DOUBLE_EQ(builtin("constant", nu_only(1e-3)).xi(123.0), 1.0);
  EXPECT_NEAR(builtin("poly", {1e-4, 50.0, std::nullopt}).xi(10.0), 16.0, 1e-12);
  const auto b = builtin("example_B", nu_only(1e-4));
  EXPECT_NEAR(b.xi(100.0), 1.0, 1e-14);
  EXPECT_NEAR(b.xi(1000.0), 1.0, 1e-12);
  EXPECT_NEAR(b.xi(10000.0), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(builtin("oscillatory", nu_only(1e-2)).xi(0.0), 0.75);
}

TEST(Modulation, ExampleBBreakpointsAndHorizon) {
  const double nu = 1e-4;
  const auto b = builtin("example_B", nu_only(nu));
  const auto bps = b.breakpoints();
  ASSERT_EQ(bps.size(), 2u);
  EXPECT_NEAR(bps[0], 100.0, 1e-12);
  EXPECT_NEAR(bps[1], 1000.0, 1e-9);
  EXPECT_NEAR(b.horizon(), 1e4, 1e-9);
  const auto a = builtin("example_A", nu_only(nu));
  ASSERT_EQ(a.breakpoints().size(), 1u);
  EXPECT_NEAR(a.horizon(), 1000.0, 1e-9);
}

TEST(Modulation, ExampleAContinuity) {
  const double nu = 1e-4;
  const auto a = builtin("example_A", nu_only(nu));
  const double t1 = std::pow(nu, -0.5);
  EXPECT_NEAR(a.xi_left(t1), 1.0, 1e-14);
  EXPECT_NEAR(a.xi(t1), 1.0, 1e-14);
}

TEST(Modulation, RightLimitAtBreakpoint) {
  const Modulation m({Piece{0, 1, Formula::Const, {1.0}}, Piece{1, 2, Formula::Const, {0.25}}});
  EXPECT_DOUBLE_EQ(m.xi(1.0), 0.25);
  EXPECT_DOUBLE_EQ(m.xi_left(1.0), 1.0);
  EXPECT_DOUBLE_EQ(m.xi(2.0), 0.25);
}

TEST(Modulation, OutOfRangeAndValidation) {
  const auto m = builtin("constant", {std::nullopt, 10.0, std::nullopt});
  EXPECT_THROW(m.xi(-1e-3), DomainError);
  EXPECT_THROW(m.xi(10.5), DomainError);
  EXPECT_THROW(m.Xi(11.0), DomainError);
  EXPECT_THROW(Modulation({Piece{0, 1, Formula::Const, {1.0}}, Piece{1.5, 2, Formula::Const, {1.0}}}), DomainError);
  EXPECT_THROW(Modulation({Piece{0.5, 1, Formula::Const, {1.0}}}), DomainError);
  EXPECT_THROW(Modulation({Piece{0, 1, Formula::Const, {-1.0}}}), DomainError);
  EXPECT_THROW(Modulation({Piece{0, 1, Formula::Linear, {1.0}}}), DomainError);
  EXPECT_THROW(builtin("bogus", nu_only(1e-3)), ConfigError);
  EXPECT_THROW(builtin("poly", {}), ConfigError);
}

TEST(Modulation, XiClosedForms) {
  const auto c = builtin("constant", {std::nullopt, 50.0, std::nullopt});
  EXPECT_DOUBLE_EQ(c.Xi(7.5), 7.5);
  const auto e = builtin("exp_unit", {std::nullopt, 50.0, std::nullopt});
  for (double t : {0.0, 0.5, 3.0, 20.0}) EXPECT_NEAR(e.Xi(t), 1 - std::exp(-t), 1e-15);
}

TEST(Modulation, WeightedSqrtIntegralPoly) {
  const double nu = 1e-4;
  const auto p = builtin("poly", nu_only(nu));
  const auto w = WeightFamily::power(0.25, nu);
  const double b = std::pow(nu, 0.25);
  for (double t : {1.0, 10.0, 50.0, p.horizon()}) {
    const double expect = t + b * t * t / 2;
    EXPECT_NEAR(p.weighted_sqrt_integral(0, t, w) / expect, 1.0, 1e-12);
    EXPECT_NEAR(p.weighted_sqrt_integral_quadrature(0, t, w) / expect, 1.0, 1e-10);
  }
}

TEST(Modulation, ClosedFormMatchesQuadratureForBuiltins) {
  const double nu = 1e-3;
  const CounterRng rng(7, 0);
  for (const auto& name : builtin_names()) {
    const auto m = builtin(name, nu_only(nu));
    EXPECT_DOUBLE_EQ(m.Xi(0.0), 0.0) << name;
    double prev = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double t = m.horizon() * rng.uniform(i);
      const double a = m.Xi(t), q = m.Xi_quadrature(t);
      EXPECT_LE(std::abs(a - q), 1e-9 * std::max(1.0, std::abs(a))) << name << " t=" << t;
    }
    for (int i = 0; i <= 200; ++i) {
      const double x = m.Xi(m.horizon() * i / 200.0);
      EXPECT_GE(x, prev - 1e-12) << name;
      prev = x;
    }
  }
}

TEST(WeightFamily, DerivativeIdentity) {
  const double nu = 1e-3;
  for (double s : {0.0, 0.25, 0.5, 1.0}) {
    const auto w = WeightFamily::power(s, nu);
    for (int n = 1; n <= 4; ++n) {
      for (double t : {0.0, 1.0, 10.0, 300.0}) {
        const double h = 1e-4 * std::max(1.0, t);
        const double lo = std::max(0.0, t - h);
        const double fd = (std::pow(w(t + h), n) - std::pow(w(lo), n)) / (t + h - lo);
        const double exact = -n * w.rate() * std::pow(w(t), n + 1);
        EXPECT_NEAR(w.power_derivative(n, t), exact, 1e-15);
        if (t > 0.0) {
          EXPECT_LE(std::abs(fd - exact), 1e-6 * std::abs(exact) + 1e-15) << s << " " << n << " " << t;
        }
      }
    }
    EXPECT_LE(w(5.0), 1.0);
    EXPECT_GT(w(5.0), 0.0);
  }
  const auto u = WeightFamily::unit();
  EXPECT_DOUBLE_EQ(u(1e6), 1.0);
  EXPECT_TRUE(u.is_unit());
}

TEST(Classify, PolyIsThm1Admissible) {
  const double nu = 1e-4;
  const auto m = builtin("poly", nu_only(nu));
  const double C = 480.0;
  const auto r = classify(m, nu, 1, WeightFamily::power(0.25, nu), 1.0 / C, 4.0, C, 1.0);
  EXPECT_TRUE(r.thm1.admissible);
  EXPECT_TRUE(r.thm1.violations.empty());
  EXPECT_EQ(r.per_interval.front().label, "thm1");
}

TEST(Classify, ExpUnitThm2NotThm1) {
  const double nu = 1e-2;
  const auto m = builtin("exp_unit", nu_only(nu));
  const double C = 480.0;
  const auto r = classify(m, nu, 1, WeightFamily::unit(), default_beta(m.min_xi(), C, nu, 1), 4.0, C, 1e-3);
  EXPECT_FALSE(r.thm1.admissible);
  EXPECT_FALSE(r.thm1.violations.empty());
  EXPECT_TRUE(r.thm2.admissible);
  EXPECT_EQ(r.per_interval.front().label, "thm2");
}

TEST(Classify, ConstantAboveOneFailsThm2) {
  const double nu = 1e-2;
  const auto m = builtin("constant", {nu, std::nullopt, 1.5});
  const auto r = classify(m, nu, 1, WeightFamily::unit(), 0.01, 4.0, 10.0, 1e-3);
  EXPECT_FALSE(r.thm2.admissible);
  ASSERT_FALSE(r.thm2.violations.empty());
  EXPECT_EQ(r.thm2.violations.front().condition, "xi_le_1");
}

TEST(Classify, ExampleAPieces) {
  const double nu = 1e-4;
  const auto m = builtin("example_A", nu_only(nu));
  const double C = 480.0;
  const auto r = classify(m, nu, 1, WeightFamily::power(0.25, nu), 1.0 / C, 4.0, C, 1.0);
  ASSERT_EQ(r.per_interval.size(), 2u);
  EXPECT_EQ(r.per_interval[0].label, "thm2");
  EXPECT_EQ(r.per_interval[1].label, "thm1");
}

TEST(Classify, OffIntervalAndParameterViolations) {
  const double nu = 1e-2;
  const Modulation m({Piece{0, 5, Formula::Const, {0.5}}, Piece{5, 10, Formula::Const, {0.0}}});
  const auto r = classify(m, nu, 1, WeightFamily::unit(), 0.5, 4.0, 1.0, 1e-3);
  EXPECT_EQ(r.per_interval[1].label, "off");
  const auto bad = classify(m, nu, 1, WeightFamily::unit(), 1e-4, 5.0, 1.0, 1e-3);
  EXPECT_FALSE(bad.thm1.admissible);
  bool beta_flag = false, ell_flag = false;
  for (const auto& v : bad.thm1.violations) {
    beta_flag = beta_flag || v.condition == "beta_range";
    ell_flag = ell_flag || v.condition == "ell_range";
  }
  EXPECT_TRUE(beta_flag);
  EXPECT_TRUE(ell_flag);
}

TEST(Classify, SwitchTimeClampedAndVariantReported) {
  const double nu = 1e-4;
  Thm1Bounds b{nu, 1, WeightFamily::power(0.25, nu), 1e-3, 4.0, 1.0};
  // |k|^{1/2} C beta^{3/2} nu^{-1/2} = 10^{-4.5} * 100 < 1, so t* clamps to 0.
  EXPECT_DOUBLE_EQ(b.t_star(), 0.0);
  Thm1Bounds big{nu, 1, WeightFamily::power(0.25, nu), 0.5, 4.0, 10.0};
  const double expect = std::pow(nu, -0.25) * (10.0 * std::pow(0.5, 1.5) / std::sqrt(nu) - 1.0);
  EXPECT_NEAR(big.t_star(), expect, 1e-9 * expect);
  EXPECT_NE(big.t_star(), big.t_star_proof_variant());
  Thm1Bounds unit{nu, 1, WeightFamily::unit(), 0.5, 4.0, 10.0};
  EXPECT_TRUE(std::isinf(unit.t_star()));
}

TEST(Classify, MonotoneInC) {
  const double nu = 1e-3;
  for (const auto& name : {"constant", "poly", "exp_nu", "oscillatory"}) {
    const auto m = builtin(name, nu_only(nu));
    const auto w = std::string(name) == "poly" ? WeightFamily::power(0.25, nu) : WeightFamily::unit();
    bool prev = true;
    for (double C : {0.5, 1.0, 2.0, 10.0, 100.0, 1000.0, 1e5}) {
      const bool adm = classify(m, nu, 1, w, 0.01, 4.0, C, 1e-3).thm1.admissible;
      if (!prev) {
        EXPECT_FALSE(adm) << name << " C=" << C;
      }
      prev = adm;
    }
  }
}

TEST(Figure1, SamplesBounds) {
  const double nu = 1e-3;
  const auto m = builtin("poly", nu_only(nu));
  Thm1Bounds b{nu, 1, WeightFamily::power(0.25, nu), 1e-3, 4.0, 480.0};
  const auto rows = figure1_samples(m, b, 1000);
  ASSERT_EQ(rows.size(), 1001u);
  for (const auto& r : rows) {
    EXPECT_LE(r.lower, r.xi * (1 + 1e-12));
    EXPECT_LE(r.xi, r.upper * (1 + 1e-12));
  }
}
