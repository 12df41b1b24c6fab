#pragma once

// Energies E0..E4 of a mode, the augmented functionals Phi (weighted) and
// Psi (time-dependent parameters), and numerical certification of the
// energy identities and of the two differential decay inequalities along
// simulated trajectories.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "shearlab/error.hpp"
#include "shearlab/fields.hpp"
#include "shearlab/modulation.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/solver.hpp"

namespace shearlab {

struct EnergySnapshot {
  double t = 0.0;
  double E0 = 0.0;  // |theta|^2
  double E1 = 0.0;  // |theta'|^2
  double E2 = 0.0;  // |theta''|^2
  double E3 = 0.0;  // Re <i k v' theta, theta'>
  double E4 = 0.0;  // |v' theta|^2
};

/// Energies plus the auxiliary inner products appearing on the right-hand
/// sides of the E3 and E4 evolution identities.
struct EnergyTerms {
  EnergySnapshot e;
  double R3a = 0.0;  // Re <i k v' theta', theta''>
  double R3b = 0.0;  // Re <i k v'' theta, theta''>
  double R4a = 0.0;  // |v' theta'|^2
  double R4b = 0.0;  // Re <v' v'' theta, theta'>
};

inline void require_profile_grid(const ComplexField& theta, const SampledProfile& profile) {
  if (!(theta.grid() == profile.grid)) {
    throw DomainError("energies: field grid (" + std::to_string(theta.grid().size()) +
                      " points) differs from the profile sampling grid (" +
                      std::to_string(profile.grid.size()) + " points)");
  }
}

inline EnergySnapshot energies(const ComplexField& theta, const SampledProfile& profile, double t = 0.0) {
  require_profile_grid(theta, profile);
  const auto d1 = spectral_derivative(theta, 1);
  const auto d2 = spectral_derivative(theta, 2);
  const auto vtheta = theta.multiplied(profile.dv);
  const Complex ik(0.0, theta.x_wavenumber());
  EnergySnapshot s;
  s.t = t;
  s.E0 = l2_norm_squared(theta);
  s.E1 = l2_norm_squared(d1);
  s.E2 = l2_norm_squared(d2);
  s.E3 = (ik * l2_inner(vtheta, d1)).real();
  s.E4 = l2_norm_squared(vtheta);
  return s;
}

inline EnergySnapshot energies(const ComplexField& theta, const ShearProfile& profile, double t = 0.0) {
  return energies(theta, profile.sample(theta.grid()), t);
}

inline EnergyTerms energy_terms(const ComplexField& theta, const SampledProfile& profile, double t = 0.0) {
  require_profile_grid(theta, profile);
  EnergyTerms r;
  r.e = energies(theta, profile, t);
  const auto d1 = spectral_derivative(theta, 1);
  const auto d2 = spectral_derivative(theta, 2);
  const Complex ik(0.0, theta.x_wavenumber());
  std::vector<double> vv(profile.dv.size());
  for (std::size_t j = 0; j < vv.size(); ++j) vv[j] = profile.dv[j] * profile.d2v[j];
  r.R3a = (ik * l2_inner(d1.multiplied(profile.dv), d2)).real();
  r.R3b = (ik * l2_inner(theta.multiplied(profile.d2v), d2)).real();
  r.R4a = l2_norm_squared(d1.multiplied(profile.dv));
  r.R4b = l2_inner(theta.multiplied(vv), d1).real();
  return r;
}

/// Re <i k xi v f, f>; zero up to rounding for any f.
inline double transport_antisymmetry(const ComplexField& f, const SampledProfile& profile, double xi) {
  require_profile_grid(f, profile);
  const Complex ik(0.0, f.x_wavenumber());
  return (ik * xi * l2_inner(f.multiplied(profile.v), f)).real();
}

// ---------------------------------------------------------------------------
// Functional parameters

struct Thm1Params {
  double nu = 0.0;
  int k = 1;
  double beta = 0.0;
  double beta0 = 0.0;
  double alpha0 = 0.0;
  double gamma0 = 0.0;
  double ell = 4.0;
  double C = 1.0;

  /// alpha0 = (beta0 nu)^{1/2}, beta0 = beta/|k|, gamma0 = 16 beta0^{3/2} / nu^{1/2}.
  static Thm1Params make(double nu, int k, double beta, double ell, double C) {
    if (!(nu > 0.0)) throw DomainError("Thm1Params: nu must be positive");
    if (k == 0) throw DomainError("Thm1Params: k must be nonzero");
    const double ak = std::abs(static_cast<double>(k));
    if (!(beta >= nu / ak * (1 - 1e-12) && beta <= 1.0)) {
      throw DomainError("Thm1Params: beta must lie in [nu/|k|, 1]");
    }
    Thm1Params p;
    p.nu = nu;
    p.k = k;
    p.beta = beta;
    p.beta0 = beta / ak;
    p.alpha0 = std::sqrt(p.beta0 * nu);
    p.gamma0 = 16.0 * std::pow(p.beta0, 1.5) / std::sqrt(nu);
    p.ell = ell;
    p.C = C;
    return p;
  }

  bool parameter_condition() const { return beta0 * beta0 / alpha0 <= gamma0 / 16.0 * (1 + 1e-12); }
};

/// Default functional constant C = 80 c_inf C_sp.
inline double default_functional_constant(double c_inf, double C_sp) { return 80.0 * c_inf * C_sp; }

/// beta = clamp(min(1, xi_min^{1/2} / C), nu/|k|, 1).
inline double default_beta(double xi_min, double C, double nu, int k) {
  const double lo = nu / std::abs(static_cast<double>(k));
  const double b = std::min(1.0, std::sqrt(std::max(0.0, xi_min)) / C);
  return std::clamp(b, lo, 1.0);
}

struct Coercivity {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
  bool holds() const {
    const double tol = 1e-12 * std::max(1.0, std::abs(upper));
    return lower <= value + tol && value <= upper + tol;
  }
};

inline double phi(const EnergySnapshot& s, const Thm1Params& p, const WeightFamily& w) {
  const double wt = w(s.t);
  const double k2 = static_cast<double>(p.k) * p.k;
  return 0.5 * (s.E0 + p.alpha0 * wt * wt * wt * s.E1 + 2.0 * p.beta0 * wt * wt * s.E3 +
                p.gamma0 * wt * k2 * s.E4);
}

inline Coercivity phi_coercivity(const EnergySnapshot& s, const Thm1Params& p, const WeightFamily& w) {
  const double wt = w(s.t);
  const double k2 = static_cast<double>(p.k) * p.k;
  const double a = p.alpha0 * wt * wt * wt * s.E1;
  const double g = p.gamma0 * k2 * wt * s.E4;
  return {(4 * s.E0 + 3 * a + 3 * g) / 8, phi(s, p, w), (4 * s.E0 + 5 * a + 5 * g) / 8};
}

struct Thm2Params {
  double nu = 0.0;
  int k = 1;
  double C_xi = 0.0;
  double C_xi_prime = 0.0;
  double A = 0.0;  // balancing constant 1/(128 C_xi c_inf C_sp) - 1 (when derived)

  /// C'_xi = 16 A C_xi^{3/2} c_inf with A = 1/(128 C_xi c_inf C_sp) - 1.
  static Thm2Params derived(double nu, int k, double C_xi, double c_inf, double C_sp) {
    if (!(C_xi > 0.0 && C_xi <= 1.0)) throw DomainError("Thm2Params: C_xi must lie in (0, 1]");
    Thm2Params p;
    p.nu = nu;
    p.k = k;
    p.C_xi = C_xi;
    p.A = 1.0 / (128.0 * C_xi * c_inf * C_sp) - 1.0;
    p.C_xi_prime = 16.0 * p.A * std::pow(C_xi, 1.5) * c_inf;
    return p;
  }

  static Thm2Params with_rate(double nu, int k, double C_xi, double C_xi_prime) {
    if (!(C_xi > 0.0 && C_xi <= 1.0)) throw DomainError("Thm2Params: C_xi must lie in (0, 1]");
    Thm2Params p;
    p.nu = nu;
    p.k = k;
    p.C_xi = C_xi;
    p.C_xi_prime = C_xi_prime;
    p.A = std::numeric_limits<double>::quiet_NaN();
    return p;
  }

  double beta(double xi) const { return C_xi * xi * xi; }
  double beta0(double xi) const { return beta(xi) / std::abs(static_cast<double>(k)); }
  double alpha0(double xi) const { return std::sqrt(nu * beta0(xi)); }
  double gamma0(double xi) const {
    return nu > 0.0 ? 16.0 * std::pow(beta0(xi), 1.5) / std::sqrt(nu) : 0.0;
  }
};

/// C_xi = 1/(256 c_inf C_sp), which makes the balancing constant A equal 1.
inline double default_C_xi(double c_inf, double C_sp) { return 1.0 / (256.0 * c_inf * C_sp); }

inline double psi(const EnergySnapshot& s, const Thm2Params& p, double xi) {
  const double k2 = static_cast<double>(p.k) * p.k;
  return 0.5 * (s.E0 + p.alpha0(xi) * s.E1 + 2.0 * p.beta0(xi) * s.E3 + p.gamma0(xi) * k2 * s.E4);
}

inline Coercivity psi_coercivity(const EnergySnapshot& s, const Thm2Params& p, double xi) {
  const double k2 = static_cast<double>(p.k) * p.k;
  const double a = p.alpha0(xi) * s.E1;
  const double g = p.gamma0(xi) * k2 * s.E4;
  return {(4 * s.E0 + 3 * a + 3 * g) / 8, psi(s, p, xi), (4 * s.E0 + 5 * a + 5 * g) / 8};
}

// ---------------------------------------------------------------------------
// Trajectory diagnostics

inline std::vector<EnergyTerms> energy_series(const Trajectory& traj, const ShearProfile& profile) {
  if (traj.size() == 0) return {};
  const auto sp = profile.sample(traj.thetas.front().grid());
  std::vector<EnergyTerms> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) out.push_back(energy_terms(traj.thetas[i], sp, traj.times[i]));
  return out;
}

namespace detail {

inline bool on_breakpoint(double t, const std::vector<double>& bps) {
  for (double b : bps) {
    if (std::abs(t - b) <= 1e-12 * std::max(1.0, std::abs(b))) return true;
  }
  return false;
}

// Second-order derivative at i from the three-point nonuniform stencil
// (i - s, i, i + s).
inline double stencil_derivative(const std::vector<double>& t, const std::vector<double>& f, std::size_t i,
                                 std::size_t s) {
  const double h1 = t[i] - t[i - s], h2 = t[i + s] - t[i];
  return -h2 / (h1 * (h1 + h2)) * f[i - s] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * (h1 + h2)) * f[i + s];
}

}  // namespace detail

/// Indices of interior saved times usable for central differences: not
/// the first or last, and not a modulation breakpoint.
inline std::vector<std::size_t> interior_indices(const std::vector<double>& times, const Modulation& m) {
  const auto bps = m.breakpoints();
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < times.size(); ++i) {
    if (!detail::on_breakpoint(times[i], bps)) idx.push_back(i);
  }
  return idx;
}

/// Central-difference derivative of a sampled series at each index in idx.
inline std::vector<double> central_derivative(const std::vector<double>& times, const std::vector<double>& f,
                                              const std::vector<std::size_t>& idx) {
  std::vector<double> d;
  d.reserve(idx.size());
  for (std::size_t i : idx) d.push_back(detail::stencil_derivative(times, f, i, 1));
  return d;
}

inline int count_sign_changes(const std::vector<double>& x) {
  int changes = 0;
  int last = 0;
  for (double v : x) {
    const int s = (v > 0) - (v < 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

struct IdentityReport {
  // Identities: (0) E0, (1) E1, (2) E3, (3) E4.
  std::array<double, 4> max_residual{};
  std::array<double, 4> scale{};
  std::size_t points = 0;
  double tolerance = 1e-4;
  bool pass() const {
    return std::all_of(max_residual.begin(), max_residual.end(), [&](double r) { return r <= tolerance; });
  }
};

/// Compares central-difference time derivatives of E0, E1, E3, E4 with the
/// exact evolution identities. The residual of each identity is
/// max|lhs - rhs| / max|rhs|. When the right-hand side is negligible against
/// the Cauchy-Schwarz size of its terms, that size is the scale instead, and
/// the energy magnitude when both vanish.
inline IdentityReport check_energy_identities(const Trajectory& traj, const ShearProfile& profile,
                                              const Modulation& m, double tolerance = 1e-4) {
  if (traj.size() < 3) throw DomainError("check_energy_identities: at least 3 snapshots are required");
  const auto terms = energy_series(traj, profile);
  const auto idx = interior_indices(traj.times, m);
  if (idx.empty()) throw DomainError("check_energy_identities: no interior snapshots");
  const double nu = traj.config.nu;
  const double k2 = static_cast<double>(traj.config.k) * traj.config.k;
  const std::size_t n = terms.size();
  std::array<std::vector<double>, 4> series;
  for (auto& s : series) s.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    series[0][i] = terms[i].e.E0;
    series[1][i] = terms[i].e.E1;
    series[2][i] = terms[i].e.E3;
    series[3][i] = terms[i].e.E4;
  }
  const double ak = std::abs(static_cast<double>(traj.config.k));
  const double sup_dv = profile.sup_dv(), sup_d2v = std::sqrt(profile.c_inf() / 3.0);
  std::array<double, 4> max_diff{}, max_rhs{}, max_energy{}, max_bound{};
  for (std::size_t i : idx) {
    const auto& T = terms[i];
    const double xi = m.xi(traj.times[i]);
    const std::array<double, 4> lhs{0.5 * detail::stencil_derivative(traj.times, series[0], i, 1),
                                    0.5 * detail::stencil_derivative(traj.times, series[1], i, 1),
                                    detail::stencil_derivative(traj.times, series[2], i, 1),
                                    0.5 * detail::stencil_derivative(traj.times, series[3], i, 1)};
    const std::array<double, 4> rhs{-nu * T.e.E1, -nu * T.e.E2 - xi * T.e.E3,
                                    -xi * k2 * T.e.E4 - 2 * nu * T.R3a - nu * T.R3b,
                                    -nu * T.R4a - 2 * nu * T.R4b};
    const double e = T.e.E0, e1 = T.e.E1, e2 = T.e.E2, e4 = T.e.E4;
    const std::array<double, 4> bound{
        nu * e1, nu * e2 + xi * ak * std::sqrt(e1 * e4),
        xi * k2 * e4 + 2 * nu * ak * sup_dv * std::sqrt(e1 * e2) + nu * ak * sup_d2v * std::sqrt(e * e2),
        nu * T.R4a + 2 * nu * sup_d2v * std::sqrt(e4 * e1)};
    for (int q = 0; q < 4; ++q) {
      max_bound[q] = std::max(max_bound[q], bound[q]);
      max_diff[q] = std::max(max_diff[q], std::abs(lhs[q] - rhs[q]));
      max_rhs[q] = std::max(max_rhs[q], std::abs(rhs[q]));
      max_energy[q] = std::max(max_energy[q], std::abs(series[q][i]));
    }
  }
  IdentityReport r;
  r.points = idx.size();
  r.tolerance = tolerance;
  for (int q = 0; q < 4; ++q) {
    const double floor = 1e-14 * std::max(1.0, max_energy[q]);
    if (max_rhs[q] > std::max(floor, 1e-8 * max_bound[q])) {
      r.scale[q] = max_rhs[q];
    } else if (max_bound[q] > floor) {
      r.scale[q] = max_bound[q];
    } else {
      r.scale[q] = std::max(max_energy[q], std::numeric_limits<double>::min());
    }
    r.max_residual[q] = max_diff[q] / r.scale[q];
  }
  return r;
}

struct DecayReport {
  std::string functional;  // "phi" or "psi"
  bool supported = true;   // hypotheses of the underlying theorem hold
  bool skipped = false;
  std::string diagnostic;
  bool pass = false;
  double max_normalized = 0.0;  // max_t [F' + rate F] / F(0)
  double max_excess = 0.0;      // same, minus the step-error estimate
  double t_at_max = 0.0;
  double threshold = 0.0;       // 1e-3 / T
  double rate_constant = 0.0;   // 1/4 (beta nu |k|)^{1/2} or C'_xi (nu |k|)^{1/2}
  std::size_t points = 0;
  std::size_t coercivity_checks = 0;
  std::size_t coercivity_violations = 0;
  double min_realised_ratio = 0.0;  // min_t (-F'/F) / rate(t), informational
};

namespace detail {

// F' + rate F at interior points, with a Richardson estimate of the
// derivative error from the doubled stencil.
template <class RateFn>
void evaluate_decay(DecayReport& r, const std::vector<double>& t, const std::vector<double>& F,
                    const std::vector<std::size_t>& idx, const RateFn& rate) {
  const double F0 = F.front();
  const double T = t.back();
  r.threshold = 1e-3 / T;
  r.max_normalized = -std::numeric_limits<double>::infinity();
  r.max_excess = -std::numeric_limits<double>::infinity();
  r.min_realised_ratio = std::numeric_limits<double>::infinity();
  std::vector<bool> usable(t.size(), false);
  for (std::size_t i : idx) usable[i] = true;
  for (std::size_t i : idx) {
    const double d = stencil_derivative(t, F, i, 1);
    double err = 0.0;
    if (i >= 2 && i + 2 < t.size() && usable[i - 1] && usable[i + 1]) {
      err = std::abs(stencil_derivative(t, F, i, 2) - d) / 3.0;
    }
    const double rt = rate(i);
    const double D = (d + rt * F[i]) / F0;
    if (D > r.max_normalized) {
      r.max_normalized = D;
      r.t_at_max = t[i];
    }
    r.max_excess = std::max(r.max_excess, D - err / F0);
    if (rt > 0.0 && F[i] > 0.0) r.min_realised_ratio = std::min(r.min_realised_ratio, -d / F[i] / rt);
  }
  r.points = idx.size();
  r.pass = r.points > 0 && r.max_excess <= r.threshold;
}

}  // namespace detail

/// Certifies F' + 1/4 (beta xi nu |k|)^{1/2} w F <= 0 for F = Phi along the
/// trajectory.
inline DecayReport check_phi_decay(const Trajectory& traj, const Thm1Params& p, const WeightFamily& w,
                                   const Modulation& m, const ShearProfile& profile) {
  DecayReport r;
  r.functional = "phi";
  const double nu = traj.config.nu;
  if (!(nu > 0.0)) {
    r.skipped = true;
    r.pass = true;
    r.diagnostic = "nu = 0: the parameter range [nu/|k|, 1] degenerates; check skipped";
    return r;
  }
  if (traj.size() < 3) throw DomainError("check_phi_decay: at least 3 snapshots are required");
  const auto adm = classify(m, nu, traj.config.k, w, p.beta, p.ell, p.C, 1.0);
  r.supported = adm.thm1.admissible;
  if (!r.supported) r.diagnostic = "modulation is not admissible for these parameters; result is unsupported";
  const double ak = std::abs(static_cast<double>(traj.config.k));
  r.rate_constant = 0.25 * std::sqrt(p.beta * nu * ak);

  const auto sp = profile.sample(traj.thetas.front().grid());
  std::vector<double> F(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto s = energies(traj.thetas[i], sp, traj.times[i]);
    const auto c = phi_coercivity(s, p, w);
    ++r.coercivity_checks;
    if (!c.holds()) ++r.coercivity_violations;
    F[i] = c.value;
  }
  const auto idx = interior_indices(traj.times, m);
  detail::evaluate_decay(r, traj.times, F, idx, [&](std::size_t i) {
    const double t = traj.times[i];
    return r.rate_constant * std::sqrt(m.xi(t)) * w(t);
  });
  return r;
}

/// Certifies F' + C'_xi (nu |k|)^{1/2} xi^3 F <= 0 for F = Psi.
inline DecayReport check_psi_decay(const Trajectory& traj, const Thm2Params& p, const Modulation& m,
                                   const ShearProfile& profile) {
  DecayReport r;
  r.functional = "psi";
  const double nu = traj.config.nu;
  if (!(nu > 0.0)) {
    r.skipped = true;
    r.pass = true;
    r.diagnostic = "nu = 0: the functional parameters degenerate; check skipped";
    return r;
  }
  if (traj.size() < 3) throw DomainError("check_psi_decay: at least 3 snapshots are required");
  const auto adm = classify(m, nu, traj.config.k, WeightFamily::unit(), std::min(1.0, nu / std::abs(traj.config.k)),
                            4.0, 1.0, p.C_xi);
  r.supported = adm.thm2.admissible;
  if (!r.supported) r.diagnostic = "modulation is not admissible for these parameters; result is unsupported";
  const double ak = std::abs(static_cast<double>(traj.config.k));
  r.rate_constant = p.C_xi_prime * std::sqrt(nu * ak);

  const auto sp = profile.sample(traj.thetas.front().grid());
  std::vector<double> F(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double xi = m.xi(traj.times[i]);
    const auto s = energies(traj.thetas[i], sp, traj.times[i]);
    const auto c = psi_coercivity(s, p, xi);
    ++r.coercivity_checks;
    if (!c.holds()) ++r.coercivity_violations;
    F[i] = c.value;
  }
  const auto idx = interior_indices(traj.times, m);
  detail::evaluate_decay(r, traj.times, F, idx, [&](std::size_t i) {
    const double x = m.xi(traj.times[i]);
    return r.rate_constant * x * x * x;
  });
  return r;
}

}  // namespace shearlab
