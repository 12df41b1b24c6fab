#pragma once

// Shear profiles v(y), their critical points, and the profile-derived
// constants entering the functional parameter formulas: sup|v'|,
// c_inf = 3 sup|v''|^2 and a numerically estimated spectral-gap constant.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shearlab/error.hpp"
#include "shearlab/fields.hpp"
#include "shearlab/random.hpp"

namespace shearlab {

struct CriticalPoint {
  double y = 0.0;
  int order = 2;  // 2 for simple points; 3 or 4 (estimated) when degenerate
  bool degenerate = false;
};

/// Profile samples on a specific grid.
struct SampledProfile {
  PeriodicGrid grid;
  std::vector<double> v;
  std::vector<double> dv;
  std::vector<double> d2v;
};

class ShearProfile;
std::vector<CriticalPoint> detect_critical_points(const ShearProfile& profile,
                                                  int resolution);

class ShearProfile {
 public:
  using Fn = std::function<double(double)>;

  static constexpr int kMetadataResolution = 4096;

  ShearProfile(std::string name, Fn v, Fn dv, Fn d2v)
      : name_(std::move(name)), v_(std::move(v)), dv_(std::move(dv)), d2v_(std::move(d2v)) {
    sup_dv_ = sup_abs(dv_);
    sup_v_ = sup_abs(v_);
    const double s2 = sup_abs(d2v_);
    c_inf_ = 3.0 * s2 * s2;
    try {
      critical_ = detect_critical_points(*this, kMetadataResolution);
      isolated_ = true;
    } catch (const UnsupportedError&) {
      isolated_ = false;
    }
  }

  /// v(y) = cos y.
  static ShearProfile kolmogorov() {
    return ShearProfile(
        "kolmogorov", [](double y) { return std::cos(y); },
        [](double y) { return -std::sin(y); }, [](double y) { return -std::cos(y); });
  }

  /// v(y) = sin y + a sin 2y.
  static ShearProfile two_mode(double a) {
    return ShearProfile(
        "two_mode", [a](double y) { return std::sin(y) + a * std::sin(2 * y); },
        [a](double y) { return std::cos(y) + 2 * a * std::cos(2 * y); },
        [a](double y) { return -std::sin(y) - 4 * a * std::sin(2 * y); });
  }

  /// Profile given by uniform samples on [0, 2*pi); evaluated through its
  /// trigonometric interpolant.
  static ShearProfile tabulated(const std::vector<double>& samples) {
    if (samples.size() < 8) {
      throw DomainError("tabulated profile needs at least 8 samples");
    }
    std::vector<Complex> z(samples.begin(), samples.end());
    auto c = forward_transform(z);
    const std::size_t m = c.size();
    const bool even = m % 2 == 0;
    const std::size_t half = (m - 1) / 2;  // paired modes 1..half
    const std::optional<double> nyquist =
        even ? std::optional<double>(c[m / 2].real()) : std::nullopt;
    const double c0 = c[0].real();
    std::vector<Complex> pos(c.begin() + 1, c.begin() + 1 + static_cast<long>(half));
    auto eval = [pos, c0, nyquist, m](double y, int order) {
      double s = order == 0 ? c0 : 0.0;
      for (std::size_t n = 1; n <= pos.size(); ++n) {
        const double dn = static_cast<double>(n);
        Complex e = std::polar(1.0, dn * y);
        Complex factor = order == 0 ? Complex(1.0) : order == 1 ? Complex(0.0, dn) : Complex(-dn * dn);
        s += 2.0 * (factor * pos[n - 1] * e).real();
      }
      if (nyquist) {
        const double dn = static_cast<double>(m / 2);
        if (order == 0) s += *nyquist * std::cos(dn * y);
        if (order == 1) s -= *nyquist * dn * std::sin(dn * y);
        if (order == 2) s -= *nyquist * dn * dn * std::cos(dn * y);
      }
      return s;
    };
    return ShearProfile(
        "tabulated", [eval](double y) { return eval(y, 0); },
        [eval](double y) { return eval(y, 1); }, [eval](double y) { return eval(y, 2); });
  }

  const std::string& name() const noexcept { return name_; }
  double v(double y) const { return v_(y); }
  double dv(double y) const { return dv_(y); }
  double d2v(double y) const { return d2v_(y); }

  /// Critical points found at the metadata resolution; empty when the
  /// critical set is not isolated.
  const std::vector<CriticalPoint>& critical_points() const noexcept { return critical_; }
  bool isolated_critical_points() const noexcept { return isolated_; }

  bool simple() const noexcept {
    return isolated_ && std::none_of(critical_.begin(), critical_.end(),
                                     [](const CriticalPoint& p) { return p.degenerate; });
  }

  /// Maximal order m of the critical points.
  int max_order() const noexcept {
    int m = 0;
    for (const auto& p : critical_) m = std::max(m, p.order);
    return m;
  }

  double sup_dv() const noexcept { return sup_dv_; }
  double sup_abs_v() const noexcept { return sup_v_; }
  double c_inf() const noexcept { return c_inf_; }

  SampledProfile sample(const PeriodicGrid& grid) const {
    SampledProfile s{grid, {}, {}, {}};
    s.v.resize(grid.size());
    s.dv.resize(grid.size());
    s.d2v.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double y = grid.point(j);
      s.v[j] = v_(y);
      s.dv[j] = dv_(y);
      s.d2v[j] = d2v_(y);
    }
    return s;
  }

 private:
  // sup over the torus: dense scan, then golden-section refinement around
  // the best sample.
  static double sup_abs(const Fn& f) {
    const int n = kMetadataResolution;
    const double h = kTwoPi / n;
    int best = 0;
    double best_val = -1.0;
    for (int j = 0; j < n; ++j) {
      const double a = std::abs(f(h * j));
      if (a > best_val) {
        best_val = a;
        best = j;
      }
    }
    double lo = h * (best - 1), hi = h * (best + 1);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = std::abs(f(x1)), f2 = std::abs(f(x2));
    for (int it = 0; it < 80; ++it) {
      if (f1 > f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = std::abs(f(x1));
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = std::abs(f(x2));
      }
    }
    return std::max({best_val, f1, f2});
  }

  std::string name_;
  Fn v_, dv_, d2v_;
  std::vector<CriticalPoint> critical_;
  bool isolated_ = false;
  double sup_dv_ = 0.0;
  double sup_v_ = 0.0;
  double c_inf_ = 0.0;
};

/// Roots of v' on the torus: sign-change bracketing plus bisection, and
/// touching roots found as near-zero local minima of |v'|. Roots with
/// |v''| > 1e-8 are simple (order 2); the rest are flagged degenerate.
inline std::vector<CriticalPoint> detect_critical_points(const ShearProfile& profile,
                                                         int resolution) {
  if (resolution < 64) {
    throw DomainError("detect_critical_points: resolution must be at least 64");
  }
  constexpr double root_tol = 1e-10;
  constexpr double order_tol = 1e-8;
  const int n = resolution;
  const double h = kTwoPi / n;
  std::vector<double> f(n);
  for (int j = 0; j < n; ++j) f[j] = profile.dv(h * j);

  const double scale = *std::max_element(f.begin(), f.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  if (std::abs(scale) <= root_tol) {
    throw UnsupportedError("detect_critical_points: derivative vanishes identically");
  }
  for (int j = 0; j < n; ++j) {
    if (std::abs(f[j]) <= root_tol && std::abs(f[(j + 1) % n]) <= root_tol &&
        std::abs(f[(j + 2) % n]) <= root_tol) {
      throw UnsupportedError(
          "detect_critical_points: derivative vanishes on an interval (non-isolated "
          "critical set)");
    }
  }

  std::vector<double> roots;
  for (int j = 0; j < n; ++j) {
    const double fa = f[j];
    const double fb = f[(j + 1) % n];
    if (std::abs(fa) <= root_tol) {
      roots.push_back(h * j);
      continue;
    }
    if (std::abs(fb) > root_tol && fa * fb < 0.0) {
      double a = h * j, b = h * (j + 1), va = fa;
      double mid = 0.5 * (a + b);
      for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (a + b);
        const double vm = profile.dv(mid);
        if (std::abs(vm) <= root_tol || b - a < 1e-15) break;
        if ((vm < 0) == (va < 0)) {
          a = mid;
          va = vm;
        } else {
          b = mid;
        }
      }
      roots.push_back(mid);
    }
  }

  // Touching roots: local minima of |v'| without a sign change.
  for (int j = 0; j < n; ++j) {
    const double fl = f[(j + n - 1) % n], fc = f[j], fr = f[(j + 1) % n];
    if (std::abs(fc) <= root_tol || std::abs(fl) <= root_tol || std::abs(fr) <= root_tol) continue;
    if (!(std::abs(fc) < std::abs(fl) && std::abs(fc) <= std::abs(fr))) continue;
    if ((fl < 0) != (fc < 0) || (fr < 0) != (fc < 0)) continue;
    double lo = h * (j - 1), hi = h * (j + 1);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto af = [&](double y) { return std::abs(profile.dv(y)); };
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = af(x1), f2 = af(x2);
    for (int it = 0; it < 120 && hi - lo > 1e-15; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = af(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = af(x2);
      }
    }
    const double y = f1 < f2 ? x1 : x2;
    if (std::min(f1, f2) <= root_tol) roots.push_back(y);
  }

  for (auto& r : roots) {
    r = std::fmod(r, kTwoPi);
    if (r < 0) r += kTwoPi;
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots) {
    if (unique.empty() || r - unique.back() > 1e-9) unique.push_back(r);
  }
  if (unique.size() > 1 && unique.front() + kTwoPi - unique.back() <= 1e-9) unique.pop_back();

  std::vector<CriticalPoint> out;
  out.reserve(unique.size());
  for (double y : unique) {
    CriticalPoint p{y, 2, false};
    if (std::abs(profile.d2v(y)) <= order_tol) {
      p.degenerate = true;
      const double e = 1e-4;
      const double d3 = (profile.d2v(y + e) - profile.d2v(y - e)) / (2 * e);
      p.order = std::abs(d3) > 1e-6 ? 3 : 4;
    }
    out.push_back(p);
  }
  return out;
}

/// sigma^{1/2} E0 / (sigma E1 + E4) for a trial field; nullopt for the zero
/// field.
inline std::optional<double> spectral_gap_ratio(const ComplexField& f,
                                                const SampledProfile& profile, double sigma) {
  if (!(f.grid() == profile.grid)) throw DomainError("spectral_gap_ratio: grid mismatch");
  const double e0 = l2_norm_squared(f);
  if (e0 == 0.0) return std::nullopt;
  const double e1 = l2_norm_squared(spectral_derivative(f, 1));
  const double e4 = l2_norm_squared(f.multiplied(profile.dv));
  const double denom = sigma * e1 + e4;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(sigma) * e0 / denom;
}

struct SpectralGapOptions {
  std::size_t n_points = 256;
  std::uint64_t seed = 0;
  bool include_ground_states = true;
};

struct SpectralGapEstimate {
  double value = 1.0;          // max(1, largest ratio seen)
  double worst_sigma = 1.0;
  std::string worst_field;     // "random", "bump" or "ground_state"
  std::size_t evaluated = 0;   // number of (field, sigma) pairs with a defined ratio
};

inline std::vector<double> default_sigma_grid() {
  return {1.0, 0.5, 0.2, 0.1, 0.05, 0.01, 1e-3, 1e-4};
}

/// Smallest C with sigma^{1/2} E0 <= C (sigma E1 + E4) over the sampled
/// sigmas and trial fields. Trial fields: `trials` random band-limited fields
/// (nested in `trials` for a fixed seed), periodised Gaussian bumps at the
/// critical points with widths tied to sigma^{1/4}, and, optionally, the
/// discrete minimiser of the Rayleigh quotient for each sigma.
inline SpectralGapEstimate spectral_gap_search(const ShearProfile& profile,
                                               const std::vector<double>& sigma_grid,
                                               std::size_t trials,
                                               SpectralGapOptions opt = {}) {
  if (trials < 100) throw DomainError("estimate_spectral_gap_constant: trials must be >= 100");
  if (sigma_grid.empty()) throw DomainError("estimate_spectral_gap_constant: empty sigma grid");
  for (double s : sigma_grid) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("estimate_spectral_gap_constant: sigma must lie in (0, 1]");
  }
  if (!profile.simple()) {
    throw UnsupportedError(
        "estimate_spectral_gap_constant: profile has degenerate or non-isolated critical points");
  }

  const PeriodicGrid grid(opt.n_points);
  const SampledProfile sp = profile.sample(grid);
  const std::size_t n = grid.size();
  SpectralGapEstimate est;
  est.value = 1.0;
  double best = 0.0;
  auto consider = [&](const ComplexField& f, double sigma, const char* kind) {
    auto r = spectral_gap_ratio(f, sp, sigma);
    if (!r) return;
    ++est.evaluated;
    if (*r > best) {
      best = *r;
      est.worst_sigma = sigma;
      est.worst_field = kind;
    }
  };

  // Random band-limited fields.
  const CounterRng rng(opt.seed, 0x5350);
  const int max_band = std::max(1, static_cast<int>(n / 4));
  std::uint64_t counter = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const int band = 1 + static_cast<int>(rng.uniform(counter++) * max_band) % max_band;
    std::vector<Complex> c(n);
    for (int m = -band; m <= band; ++m) {
      const std::size_t slot = m >= 0 ? static_cast<std::size_t>(m) : n - static_cast<std::size_t>(-m);
      c[slot] = Complex(rng.normal(counter), rng.normal(counter + 1));
      counter += 2;
    }
    const auto f = ComplexField::from_coefficients(grid, 1, c);
    for (double s : sigma_grid) consider(f, s, "random");
  }

  // Bumps at the critical points.
  for (double s : sigma_grid) {
    for (double width_factor : {0.5, 1.0, 2.0}) {
      const double w = width_factor * std::pow(s, 0.25);
      for (const auto& cp : profile.critical_points()) {
        const auto f = ComplexField::from_function(grid, 1, [&](double y) {
          double sum = 0.0;
          for (int wrap = -2; wrap <= 2; ++wrap) {
            const double d = y - cp.y + kTwoPi * wrap;
            sum += std::exp(-0.5 * d * d / (w * w));
          }
          return sum;
        });
        consider(f, s, "bump");
      }
    }
  }

  if (opt.include_ground_states) {
    // Circulant matrix of -d^2/dy^2 in physical space (Nyquist slot dropped,
    // matching spectral_derivative of order 1).
    std::vector<double> row(n, 0.0);
    for (std::size_t d = 0; d < n; ++d) {
      double sum = 0.0;
      for (std::size_t slot = 0; slot < n; ++slot) {
        if (n % 2 == 0 && slot == n / 2) continue;
        const double m = grid.wavenumber(slot);
        sum += m * m * std::cos(m * kTwoPi * static_cast<double>(d) / static_cast<double>(n));
      }
      row[d] = sum / static_cast<double>(n);
    }
    Eigen::MatrixXd lap(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) lap(i, j) = row[(i + n - j) % n];
    }
    for (double s : sigma_grid) {
      Eigen::MatrixXd a = s * lap;
      for (std::size_t i = 0; i < n; ++i) a(i, i) += sp.dv[i] * sp.dv[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
      if (solver.info() != Eigen::Success) continue;
      const Eigen::VectorXd u = solver.eigenvectors().col(0);
      std::vector<Complex> vals(n);
      for (std::size_t i = 0; i < n; ++i) vals[i] = u(static_cast<Eigen::Index>(i));
      consider(ComplexField(grid, std::move(vals), 1), s, "ground_state");
    }
  }

  if (est.evaluated == 0) {
    throw DomainError("estimate_spectral_gap_constant: every trial field was zero");
  }
  est.value = std::max(1.0, best);
  return est;
}

inline double estimate_spectral_gap_constant(const ShearProfile& profile,
                                             const std::vector<double>& sigma_grid,
                                             std::size_t trials, SpectralGapOptions opt = {}) {
  return spectral_gap_search(profile, sigma_grid, trials, opt).value;
}

}  // namespace shearlab
