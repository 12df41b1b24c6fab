#pragma once

// Periodic grids on the y-torus, complex scalar fields sampled on them, and
// the spectral machinery (transforms, derivatives, Sobolev norms) built on
// top of FFTW.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shearlab/error.hpp"

namespace shearlab {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform grid y_j = 2*pi*j/n on [0, 2*pi).
class PeriodicGrid {
 public:
  explicit PeriodicGrid(std::size_t n_points) : n_(n_points) {
    if (n_points < 8) {
      throw DomainError("PeriodicGrid: n_points must be at least 8, got " +
                        std::to_string(n_points));
    }
  }

  std::size_t size() const noexcept { return n_; }
  double length() const noexcept { return kTwoPi; }
  double spacing() const noexcept { return kTwoPi / static_cast<double>(n_); }
  double point(std::size_t j) const noexcept {
    return kTwoPi * static_cast<double>(j) / static_cast<double>(n_);
  }

  std::vector<double> points() const {
    std::vector<double> y(n_);
    for (std::size_t j = 0; j < n_; ++j) y[j] = point(j);
    return y;
  }

  /// Signed wavenumber carried by FFT slot `index`; slots run over
  /// {0, 1, ..., n/2-1, -n/2, ..., -1} for even n.
  int wavenumber(std::size_t index) const noexcept {
    const auto n = static_cast<long>(n_);
    const auto i = static_cast<long>(index);
    return static_cast<int>(2 * i < n ? i : i - n);
  }

  /// Highest resolved |wavenumber|.
  int max_wavenumber() const noexcept { return static_cast<int>(n_ / 2); }

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  std::size_t n_;
};

namespace detail {

// FFTW planning is not thread safe; execution with the new-array interface
// is. Plans are created once per size under a lock and reused.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  std::pair<fftw_plan, fftw_plan> plans(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<Complex> a(n), b(n);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int ni = static_cast<int>(n);
    fftw_plan fwd = fftw_plan_dft_1d(ni, in, out, FFTW_FORWARD, flags);
    fftw_plan bwd = fftw_plan_dft_1d(ni, in, out, FFTW_BACKWARD, flags);
    return plans_.emplace(n, std::make_pair(fwd, bwd)).first->second;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

  ~FftPlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.first);
      fftw_destroy_plan(p.second);
    }
  }

 private:
  FftPlanCache() = default;
  std::mutex mutex_;
  std::map<std::size_t, std::pair<fftw_plan, fftw_plan>> plans_;
};

}  // namespace detail

/// Fourier coefficients c_n = (1/N) sum_j f_j e^{-i n y_j}, in FFT slot order,
/// so that f(y_j) = sum_n c_n e^{i n y_j}.
inline std::vector<Complex> forward_transform(std::span<const Complex> values) {
  const std::size_t n = values.size();
  std::vector<Complex> in(values.begin(), values.end());
  std::vector<Complex> out(n);
  auto plan = detail::FftPlanCache::instance().plans(n).first;
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& c : out) c *= scale;
  return out;
}

/// Inverse of forward_transform.
inline std::vector<Complex> inverse_transform(std::span<const Complex> coeffs) {
  const std::size_t n = coeffs.size();
  std::vector<Complex> in(coeffs.begin(), coeffs.end());
  std::vector<Complex> out(n);
  auto plan = detail::FftPlanCache::instance().plans(n).second;
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

/// Samples of theta(k, y) for a single horizontal wavenumber k != 0.
/// Values are immutable after construction.
class ComplexField {
 public:
  ComplexField(PeriodicGrid grid, std::vector<Complex> values, int x_wavenumber)
      : grid_(grid), values_(std::move(values)), k_(x_wavenumber) {
    if (values_.size() != grid_.size()) {
      throw DomainError("ComplexField: expected " + std::to_string(grid_.size()) +
                        " samples, got " + std::to_string(values_.size()));
    }
    if (k_ == 0) {
      throw DomainError("ComplexField: x wavenumber must be nonzero");
    }
  }

  template <class F>
  static ComplexField from_function(const PeriodicGrid& grid, int k, F&& f) {
    std::vector<Complex> v(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) v[j] = Complex(f(grid.point(j)));
    return ComplexField(grid, std::move(v), k);
  }

  static ComplexField from_coefficients(const PeriodicGrid& grid, int k,
                                        std::span<const Complex> coeffs) {
    if (coeffs.size() != grid.size()) {
      throw DomainError("ComplexField: coefficient count does not match grid");
    }
    return ComplexField(grid, inverse_transform(coeffs), k);
  }

  /// theta(y) = e^{i n y}.
  static ComplexField single_mode(const PeriodicGrid& grid, int k, int n) {
    return from_function(grid, k, [n](double y) {
      return std::polar(1.0, static_cast<double>(n) * y);
    });
  }

  static ComplexField zero(const PeriodicGrid& grid, int k) {
    return ComplexField(grid, std::vector<Complex>(grid.size()), k);
  }

  const PeriodicGrid& grid() const noexcept { return grid_; }
  int x_wavenumber() const noexcept { return k_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const Complex> values() const noexcept { return values_; }
  const Complex& operator[](std::size_t j) const { return values_[j]; }

  std::vector<Complex> coefficients() const { return forward_transform(values_); }

  bool is_finite() const noexcept {
    for (const auto& z : values_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
  }

  ComplexField conj() const {
    std::vector<Complex> v(values_.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::conj(values_[j]);
    return ComplexField(grid_, std::move(v), -k_);
  }

  ComplexField scaled(Complex factor) const {
    std::vector<Complex> v(values_);
    for (auto& z : v) z *= factor;
    return ComplexField(grid_, std::move(v), k_);
  }

  /// Pointwise product with real samples a(y_j).
  ComplexField multiplied(std::span<const double> a) const {
    if (a.size() != values_.size()) {
      throw DomainError("ComplexField: multiplier sample count does not match grid");
    }
    std::vector<Complex> v(values_);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= a[j];
    return ComplexField(grid_, std::move(v), k_);
  }

 private:
  PeriodicGrid grid_;
  std::vector<Complex> values_;
  int k_;
};

inline void require_same_grid(const ComplexField& f, const ComplexField& g,
                              const char* what) {
  if (!(f.grid() == g.grid())) {
    throw DomainError(std::string(what) + ": fields live on different grids (" +
                      std::to_string(f.grid().size()) + " vs " +
                      std::to_string(g.grid().size()) + " points)");
  }
}

/// order-th y-derivative by multiplication of the Fourier coefficients with
/// (i n)^order. The unpaired Nyquist slot is dropped for odd orders.
inline ComplexField spectral_derivative(const ComplexField& f, int order) {
  if (order != 1 && order != 2) {
    throw DomainError("spectral_derivative: order must be 1 or 2, got " +
                      std::to_string(order));
  }
  if (f.size() == 0) throw DomainError("spectral_derivative: empty field");
  auto c = f.coefficients();
  const auto& grid = f.grid();
  const bool even = grid.size() % 2 == 0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double n = grid.wavenumber(j);
    if (order == 1) {
      if (even && j == grid.size() / 2) {
        c[j] = 0.0;
      } else {
        c[j] *= Complex(0.0, n);
      }
    } else {
      c[j] *= -n * n;
    }
  }
  return ComplexField::from_coefficients(grid, f.x_wavenumber(), c);
}

/// <f, g> = integral over the torus of f * conj(g), by the rectangle rule.
inline Complex l2_inner(const ComplexField& f, const ComplexField& g) {
  require_same_grid(f, g, "l2_inner");
  Complex sum = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) sum += f[j] * std::conj(g[j]);
  return sum * f.grid().spacing();
}

inline double l2_norm_squared(const ComplexField& f) {
  double sum = 0.0;
  for (const auto& z : f.values()) sum += std::norm(z);
  return sum * f.grid().spacing();
}

/// H^s norm realised as the Fourier multiplier (1 + n^2)^{s/2}, s in {-1, 0, 1}.
/// The s = -1 case is the norm dual to the full H^1 norm.
inline double sobolev_norm(const ComplexField& f, double s) {
  if (s != -1.0 && s != 0.0 && s != 1.0) {
    throw DomainError("sobolev_norm: s must be -1, 0 or 1");
  }
  const auto c = f.coefficients();
  double sum = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double n = f.grid().wavenumber(j);
    sum += std::pow(1.0 + n * n, s) * std::norm(c[j]);
  }
  return std::sqrt(kTwoPi * sum);
}

}  // namespace shearlab
