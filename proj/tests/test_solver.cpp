#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "shearlab/solver.hpp"

using namespace shearlab;

namespace {

const ShearProfile& cosine() {
  static const ShearProfile p = ShearProfile::kolmogorov();
  return p;
}

SolverConfig config(double nu, double dt, std::size_t n = 64, int k = 1) {
  SolverConfig c;
  c.nu = nu;
  c.k = k;
  c.dt = dt;
  c.n_points = n;
  return c;
}

Modulation constant(double T, double value = 1.0) { return builtin("constant", {std::nullopt, T, value}); }

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

ComplexField mixed_initial(const PeriodicGrid& g, int k = 1) {
  return ComplexField::from_function(g, k, [](double y) {
    return Complex(std::cos(y) + 0.5 * std::sin(2 * y), 0.25 * std::cos(3 * y));
  });
}

}  // namespace

TEST(Step, PureDiffusionSingleMode) {
  const PeriodicGrid g(32);
  const auto m = constant(1.0, 0.0);
  const double nu = 1e-2, dt = 0.1;
  const auto f = ComplexField::single_mode(g, 1, 1);
  const auto out = step(f, 0.0, dt, config(nu, dt, 32), cosine(), m);
  EXPECT_LT(max_diff(out, f.scaled(std::exp(-nu * dt))), 1e-15);
}

TEST(Step, InviscidIsExactTransport) {
  const PeriodicGrid g(64);
  const auto m = builtin("oscillatory", {std::nullopt, 10.0, std::nullopt});
  const auto f = mixed_initial(g);
  const double t = 1.3, dt = 0.7;
  const auto out = step(f, t, dt, config(0.0, dt), cosine(), m);
  const double dXi = m.Xi(t + dt) - m.Xi(t);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_LT(std::abs(out[j] - std::exp(Complex(0, -dXi * std::cos(g.point(j)))) * f[j]), 1e-14);
  }
}

TEST(Step, NormNonIncreasingAndSupInvariant) {
  const PeriodicGrid g(64);
  const auto m = constant(10.0);
  auto f = mixed_initial(g);
  for (int i = 0; i < 50; ++i) {
    const auto next = step(f, 0.1 * i, 0.1, config(1e-2, 0.1), cosine(), m);
    EXPECT_LE(l2_norm_squared(next), l2_norm_squared(f) * (1 + 1e-14));
    f = next;
  }
  auto h = mixed_initial(g);
  double sup0 = 0, sup1 = 0;
  const auto moved = step(h, 0.0, 2.0, config(0.0, 2.0), cosine(), m);
  for (std::size_t j = 0; j < g.size(); ++j) {
    sup0 = std::max(sup0, std::abs(h[j]));
    sup1 = std::max(sup1, std::abs(moved[j]));
  }
  EXPECT_NEAR(sup0, sup1, 1e-14);
}

TEST(Step, StrangSecondOrderLieFirstOrder) {
  const PeriodicGrid g(64);
  const double nu = 1e-2, T = 1.0;
  const auto m = constant(T);
  const auto f = mixed_initial(g);
  auto final_state = [&](double dt, Scheme s) {
    auto c = config(nu, dt);
    c.scheme = s;
    c.save_every = 1000000;
    return simulate(f, T, c, cosine(), m).thetas.back();
  };
  auto dist = [&](const ComplexField& a, const ComplexField& b) {
    std::vector<Complex> d(a.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = a[j] - b[j];
    return std::sqrt(l2_norm_squared(ComplexField(g, d, 1)));
  };
  for (Scheme s : {Scheme::Strang, Scheme::Lie}) {
    const auto ref = final_state(1.25e-4, s);
    std::vector<double> errs;
    for (double dt : {4e-3, 2e-3, 1e-3}) errs.push_back(dist(final_state(dt, s), ref));
    const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
    const double expect = s == Scheme::Strang ? 2.0 : 1.0;
    EXPECT_NEAR(o1, expect, 0.1) << scheme_name(s);
    EXPECT_NEAR(o2, expect, 0.1) << scheme_name(s);
  }
}

TEST(Simulate, HeatDecayOracle) {
  const PeriodicGrid g(32);
  const double nu = 1e-2;
  for (int n : {1, 2, 5}) {
    const auto traj = simulate(ComplexField::single_mode(g, 1, n), 20.0, config(nu, 0.01, 32), cosine(),
                               constant(20.0, 0.0));
    for (std::size_t i = 0; i < traj.size(); i += 50) {
      const double exact = kTwoPi * std::exp(-2 * nu * n * n * traj.times[i]);
      EXPECT_NEAR(l2_norm_squared(traj.thetas[i]) / exact, 1.0, 1e-10);
    }
  }
}

TEST(Simulate, InviscidConservesEnergyAndMatchesExact) {
  const PeriodicGrid g(64);
  const auto m = builtin("example_B", {0.01, std::nullopt, std::nullopt});
  const auto f = mixed_initial(g);
  auto c = config(0.0, 0.05);
  c.save_every = 10;
  const auto traj = simulate(f, 50.0, c, cosine(), m);
  const double e0 = l2_norm_squared(f);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_NEAR(l2_norm_squared(traj.thetas[i]) / e0, 1.0, 1e-12);
    EXPECT_LE(max_diff(traj.thetas[i], exact_inviscid(f, traj.times[i], cosine(), m)), 1e-12);
  }
}

TEST(Simulate, EnhancedDecayBeatsDiffusion) {
  const PeriodicGrid g(128);
  const double nu = 1e-3;
  auto c = config(nu, 0.01, 128);
  const auto traj = simulate(ComplexField::single_mode(g, 1, 1), 100.0, c, cosine(), constant(100.0));
  const double e0 = l2_norm_squared(traj.physical(0));
  double t_e = -1;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (l2_norm_squared(traj.physical(i)) <= std::exp(-1.0) * e0) {
      t_e = traj.times[i];
      break;
    }
  }
  ASSERT_GT(t_e, 0.0);
  EXPECT_LT(t_e, 1.0 / (2 * nu));
  // Pure diffusion of the lowest mode: the e-fold time is 1/(2 nu (k^2 + 1)).
  EXPECT_LE(t_e / (1.0 / (2 * nu * 2.0)), 0.2);
}

TEST(Simulate, TimesAndBreakpoints) {
  const PeriodicGrid g(32);
  const auto m = builtin("example_B", {0.01, std::nullopt, std::nullopt});
  auto c = config(1e-2, 0.3, 32);
  c.save_every = 7;
  const auto traj = simulate(ComplexField::single_mode(g, 1, 1), m.horizon(), c, cosine(), m);
  EXPECT_EQ(traj.times.front(), 0.0);
  EXPECT_EQ(traj.times.back(), m.horizon());
  for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
  for (double bp : m.breakpoints()) {
    EXPECT_NE(std::find(traj.times.begin(), traj.times.end(), bp), traj.times.end()) << bp;
  }
}

TEST(Simulate, MonotoneDecayWithViscosity) {
  const PeriodicGrid g(64);
  const auto traj = simulate(mixed_initial(g), 30.0, config(1e-2, 0.05), cosine(),
                             builtin("oscillatory", {std::nullopt, 30.0, std::nullopt}));
  for (std::size_t i = 1; i < traj.size(); ++i) {
    EXPECT_LT(l2_norm_squared(traj.thetas[i]), l2_norm_squared(traj.thetas[i - 1]));
  }
}

TEST(Simulate, ConjugateSymmetry) {
  const PeriodicGrid g(64);
  const auto m = constant(5.0);
  const auto f = mixed_initial(g, 2);
  const auto a = simulate(f, 5.0, config(1e-2, 0.01, 64, 2), cosine(), m);
  const auto b = simulate(f.conj(), 5.0, config(1e-2, 0.01, 64, -2), cosine(), m);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); i += 50) EXPECT_LT(max_diff(a.thetas[i].conj(), b.thetas[i]), 1e-12);
}

TEST(Simulate, Errors) {
  const PeriodicGrid g(32);
  const auto m = constant(5.0);
  const auto f = ComplexField::single_mode(g, 1, 1);
  EXPECT_THROW(simulate(f, 6.0, config(1e-2, 0.01, 32), cosine(), m), DomainError);
  EXPECT_THROW(simulate(f, 1.0, config(1e-2, 0.01, 64), cosine(), m), DomainError);
  EXPECT_THROW(simulate(f, 1.0, config(1e-2, 2.0, 32), cosine(), m), DomainError);
  EXPECT_THROW(simulate(f, 1.0, config(1e-2, -1.0, 32), cosine(), m), DomainError);
  EXPECT_THROW(simulate(f, 1.0, config(1e-2, 0.01, 32, 2), cosine(), m), DomainError);
}

TEST(Simulate, NonFiniteAborts) {
  const PeriodicGrid g(32);
  std::vector<Complex> v(32, Complex(1, 0));
  v[3] = Complex(std::nan(""), 0);
  const ComplexField f(g, v, 1);
  EXPECT_THROW(simulate(f, 1.0, config(1e-2, 0.1, 32), cosine(), constant(1.0)), NumericalError);
}

TEST(ExactInviscid, Examples) {
  const PeriodicGrid g(64);
  const auto m = constant(10.0);
  const auto f = mixed_initial(g);
  EXPECT_LT(max_diff(exact_inviscid(f, 0.0, cosine(), m), f), 1e-15);
  const auto r = exact_inviscid(f, M_PI, cosine(), m);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_LT(std::abs(r[j] - std::exp(Complex(0, -M_PI * std::cos(g.point(j)))) * f[j]), 1e-14);
    EXPECT_DOUBLE_EQ(std::abs(r[j]), std::abs(f[j]));
  }
  const auto traj = simulate(f, 5.0, config(0.0, 0.01), cosine(), m);
  EXPECT_LE(max_diff(traj.thetas.back(), exact_inviscid(f, 5.0, cosine(), m)), 1e-12);
}

TEST(Snapshot, RoundTrip) {
  const PeriodicGrid g(16);
  const auto f = mixed_initial(g, -3);
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_snapshot(ss, f, 2.5);
  EXPECT_EQ(ss.str().size(), 24u + 16u * 16u);
  const auto [h, t] = read_snapshot(ss);
  EXPECT_EQ(t, 2.5);
  EXPECT_EQ(h.x_wavenumber(), -3);
  EXPECT_EQ(max_diff(f, h), 0.0);
}
