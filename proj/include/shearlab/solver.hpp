#pragma once

// Time integration of  d/dt theta + xi(t) v(y) i k theta = nu d^2/dy^2 theta
// for a single horizontal mode k, by splitting into an exact diffusion
// multiplier (diagonal in Fourier space) and an exact transport phase
// (diagonal in physical space).

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "shearlab/error.hpp"
#include "shearlab/fields.hpp"
#include "shearlab/modulation.hpp"
#include "shearlab/shear.hpp"

namespace shearlab {

enum class Scheme { Strang, Lie };

inline std::string_view scheme_name(Scheme s) { return s == Scheme::Strang ? "strang" : "lie"; }

inline Scheme parse_scheme(std::string_view s) {
  if (s == "strang") return Scheme::Strang;
  if (s == "lie") return Scheme::Lie;
  throw ConfigError("unknown scheme '" + std::string(s) + "' (expected strang or lie)");
}

struct SolverConfig {
  double nu = 0.0;
  int k = 1;
  double dt = 1e-2;
  std::size_t n_points = 128;
  std::size_t save_every = 1;
  Scheme scheme = Scheme::Strang;

  void validate() const {
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("SolverConfig: nu must be >= 0");
    if (k == 0) throw DomainError("SolverConfig: k must be nonzero");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("SolverConfig: dt must be positive");
    if (n_points < 8) throw DomainError("SolverConfig: n_points must be at least 8");
    if (save_every < 1) throw DomainError("SolverConfig: save_every must be at least 1");
  }
};

/// min(0.01 / max(1, sup xi * sup|v| * |k|), 0.01 / nu^{1/2}).
inline double default_time_step(double nu, int k, const ShearProfile& profile, const Modulation& m) {
  const double transport = 0.01 / std::max(1.0, m.max_xi() * profile.sup_abs_v() * std::abs(k));
  if (nu <= 0.0) return transport;
  return std::min(transport, 0.01 / std::sqrt(nu));
}

namespace detail {

inline std::vector<double> diffusion_factors(const PeriodicGrid& grid, double nu, double tau) {
  std::vector<double> f(grid.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double n = grid.wavenumber(j);
    f[j] = std::exp(-nu * n * n * tau);
  }
  return f;
}

inline void apply_transport(std::vector<Complex>& values, const std::vector<double>& v, int k,
                            double dXi) {
  const double phase = -static_cast<double>(k) * dXi;
  for (std::size_t j = 0; j < values.size(); ++j) {
    values[j] *= std::polar(1.0, phase * v[j]);
  }
}

inline void require_finite(const std::vector<Complex>& values, double t) {
  for (const auto& z : values) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw NumericalError("non-finite field value encountered at t = " + std::to_string(t));
    }
  }
}

inline double increment(const Modulation& m, double t, double dt) {
  const auto& p = m.pieces()[m.piece_index(t)];
  if (t + dt <= p.t1 * (1 + 1e-15)) return p.integral(t, t + dt);
  return m.Xi(std::min(t + dt, m.horizon())) - m.Xi(t);
}

}  // namespace detail

/// One step from t to t + dt. Strang: half diffusion, full transport with
/// the exact increment Xi(t + dt) - Xi(t), half diffusion. Lie: transport
/// then full diffusion.
inline ComplexField step(const ComplexField& state, double t, double dt, const SolverConfig& cfg,
                         const ShearProfile& profile, const Modulation& m) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  if (state.x_wavenumber() != cfg.k) throw DomainError("step: field wavenumber differs from config k");
  const auto& grid = state.grid();
  const auto sampled = profile.sample(grid);
  const double dXi = detail::increment(m, t, dt);
  std::vector<Complex> values(state.values().begin(), state.values().end());
  if (cfg.scheme == Scheme::Strang) {
    const auto half = detail::diffusion_factors(grid, cfg.nu, 0.5 * dt);
    auto c = forward_transform(values);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] *= half[j];
    values = inverse_transform(c);
    detail::apply_transport(values, sampled.v, cfg.k, dXi);
    c = forward_transform(values);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] *= half[j];
    values = inverse_transform(c);
  } else {
    detail::apply_transport(values, sampled.v, cfg.k, dXi);
    const auto full = detail::diffusion_factors(grid, cfg.nu, dt);
    auto c = forward_transform(values);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] *= full[j];
    values = inverse_transform(c);
  }
  detail::require_finite(values, t + dt);
  return ComplexField(grid, std::move(values), cfg.k);
}

/// Saved states of the transformed variable theta; the physical mode is
/// e^{-nu k^2 t} theta.
struct Trajectory {
  SolverConfig config;
  std::string profile_name;
  std::string modulation_name;
  std::vector<double> times;
  std::vector<ComplexField> thetas;

  std::size_t size() const noexcept { return times.size(); }

  ComplexField physical(std::size_t i) const {
    const double k = config.k;
    return thetas.at(i).scaled(std::exp(-config.nu * k * k * times.at(i)));
  }
};

/// Advances theta0 from 0 to T. Breakpoints of the modulation are step
/// boundaries; within each segment the step is cfg.dt with the last step
/// shortened to land on the segment end. States are saved at t = 0, every
/// save_every steps, at every breakpoint and at T.
inline Trajectory simulate(const ComplexField& theta0, double T, const SolverConfig& cfg,
                           const ShearProfile& profile, const Modulation& m) {
  cfg.validate();
  if (!(T > 0.0)) throw DomainError("simulate: T must be positive");
  if (T > m.horizon() * (1 + 1e-12)) {
    throw DomainError("simulate: T = " + std::to_string(T) + " exceeds the modulation horizon " +
                      std::to_string(m.horizon()));
  }
  T = std::min(T, m.horizon());
  if (cfg.dt > T) throw DomainError("simulate: dt must not exceed T");
  if (theta0.grid().size() != cfg.n_points) throw DomainError("simulate: initial field grid differs from n_points");
  if (theta0.x_wavenumber() != cfg.k) throw DomainError("simulate: initial field wavenumber differs from k");
  if (!theta0.is_finite()) throw NumericalError("simulate: initial field is not finite");

  const auto& grid = theta0.grid();
  const auto sampled = profile.sample(grid);
  const bool viscous = cfg.nu > 0.0;
  const bool strang = cfg.scheme == Scheme::Strang;

  Trajectory traj;
  traj.config = cfg;
  traj.profile_name = profile.name();
  traj.modulation_name = m.name();
  traj.times.push_back(0.0);
  traj.thetas.push_back(theta0);

  std::vector<double> segments{0.0};
  for (double b : m.breakpoints()) {
    if (b < T) segments.push_back(b);
  }
  segments.push_back(T);

  std::vector<Complex> values(theta0.values().begin(), theta0.values().end());
  std::size_t steps_done = 0;
  std::vector<double> cached_factors;
  double cached_tau = -1.0;
  auto factors_for = [&](double tau) -> const std::vector<double>& {
    if (tau != cached_tau) {
      cached_factors = detail::diffusion_factors(grid, cfg.nu, tau);
      cached_tau = tau;
    }
    return cached_factors;
  };
  auto diffuse = [&](double tau) {
    if (!viscous) return;
    auto c = forward_transform(values);
    const auto& f = factors_for(tau);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] *= f[j];
    values = inverse_transform(c);
  };

  for (std::size_t s = 0; s + 1 < segments.size(); ++s) {
    const double a = segments[s], b = segments[s + 1];
    const auto& piece = m.pieces()[m.piece_index(a)];
    const auto n_steps = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / cfg.dt - 1e-9)));
    for (std::size_t i = 0; i < n_steps; ++i) {
      const double t0 = a + static_cast<double>(i) * cfg.dt;
      const double t1 = i + 1 == n_steps ? b : a + static_cast<double>(i + 1) * cfg.dt;
      const double h = t1 - t0;
      const double dXi = piece.integral(t0, t1);
      if (strang) {
        diffuse(0.5 * h);
        detail::apply_transport(values, sampled.v, cfg.k, dXi);
        diffuse(0.5 * h);
      } else {
        detail::apply_transport(values, sampled.v, cfg.k, dXi);
        diffuse(h);
      }
      ++steps_done;
      const bool last = i + 1 == n_steps;
      if (steps_done % cfg.save_every == 0 || last) {
        detail::require_finite(values, t1);
        if (t1 > traj.times.back()) {
          traj.times.push_back(t1);
          traj.thetas.emplace_back(grid, values, cfg.k);
        }
      }
    }
  }
  detail::require_finite(values, T);
  return traj;
}

/// Inviscid solution e^{-i k Xi(t) v(y)} theta0.
inline ComplexField exact_inviscid(const ComplexField& theta0, double t, const ShearProfile& profile,
                                   const Modulation& m) {
  const double Xi = m.Xi(t);
  const auto sampled = profile.sample(theta0.grid());
  std::vector<Complex> values(theta0.values().begin(), theta0.values().end());
  detail::apply_transport(values, sampled.v, theta0.x_wavenumber(), Xi);
  return ComplexField(theta0.grid(), std::move(values), theta0.x_wavenumber());
}

// ---------------------------------------------------------------------------
// Binary snapshots: little-endian int64 n_points, int64 k, float64 t, then
// n_points interleaved (re, im) float64 pairs.

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("snapshot: truncated file");
  return to_little(v);
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const ComplexField& f, double t) {
  detail::put<std::int64_t>(os, static_cast<std::int64_t>(f.size()));
  detail::put<std::int64_t>(os, f.x_wavenumber());
  detail::put<double>(os, t);
  for (const auto& z : f.values()) {
    detail::put<double>(os, z.real());
    detail::put<double>(os, z.imag());
  }
}

inline std::pair<ComplexField, double> read_snapshot(std::istream& is) {
  const auto n = detail::get<std::int64_t>(is);
  const auto k = detail::get<std::int64_t>(is);
  const double t = detail::get<double>(is);
  if (n < 8 || n > (std::int64_t{1} << 30)) throw Error("snapshot: implausible point count");
  std::vector<Complex> v(static_cast<std::size_t>(n));
  for (auto& z : v) {
    const double re = detail::get<double>(is);
    const double im = detail::get<double>(is);
    z = Complex(re, im);
  }
  return {ComplexField(PeriodicGrid(static_cast<std::size_t>(n)), std::move(v), static_cast<int>(k)), t};
}

}  // namespace shearlab
