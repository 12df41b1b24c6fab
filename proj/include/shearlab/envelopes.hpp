#pragma once

// Theoretical upper envelopes for E0(t)/E0(0) and for the mixing ratio
// |theta(t)|_{H^-1} / |theta_0|_{H^1}, gluing of per-interval envelopes, and
// fitting of the non-explicit constants against simulated data.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shearlab/energetics.hpp"
#include "shearlab/error.hpp"
#include "shearlab/modulation.hpp"

namespace shearlab {

enum class EnvelopeKind { Thm1, Class0, Thm2, Glued, Mixing, Diffusion, Autonomous, Exponential };

inline std::string_view envelope_kind_name(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::Thm1: return "thm1";
    case EnvelopeKind::Class0: return "class0";
    case EnvelopeKind::Thm2: return "thm2";
    case EnvelopeKind::Glued: return "glued";
    case EnvelopeKind::Mixing: return "mixing";
    case EnvelopeKind::Diffusion: return "diffusion";
    case EnvelopeKind::Autonomous: return "autonomous";
    case EnvelopeKind::Exponential: return "exponential";
  }
  return "?";
}

/// log envelope(t) = log(base * C_ed) - rate_constant * G(t) - D(t).
struct RateModel {
  double base = 1.0;
  double C_ed = 1.0;
  double rate_constant = 0.0;
  std::function<double(double)> G;  // nondecreasing rate integral, G(0) = 0
  std::function<double(double)> D;  // additional exponent (diffusion), D(0) = 0

  double exponent(double t) const { return -rate_constant * G(t) - (D ? D(t) : 0.0); }
  double log_value(double t) const { return std::log(base * C_ed) + exponent(t); }
};

class Envelope {
 public:
  Envelope(EnvelopeKind kind, RateModel model, std::map<std::string, double> constants = {})
      : kind_(kind), model_(std::move(model)), constants_(std::move(constants)) {
    sync_constants();
  }

  /// Envelope given by an arbitrary evaluator (used by the mixing bound).
  Envelope(EnvelopeKind kind, std::function<double(double)> evaluator, std::map<std::string, double> constants)
      : kind_(kind), evaluator_(std::move(evaluator)), constants_(std::move(constants)) {}

  EnvelopeKind kind() const noexcept { return kind_; }
  const std::map<std::string, double>& constants() const noexcept { return constants_; }
  const std::optional<RateModel>& model() const noexcept { return model_; }
  bool forced() const noexcept { return forced_; }
  void set_forced(bool f) {
    forced_ = f;
    constants_["forced"] = f ? 1.0 : 0.0;
  }

  double operator()(double t) const {
    if (model_) return std::exp(model_->log_value(t));
    return evaluator_(t);
  }

  /// Exponent part (the logarithm without the prefactor).
  double exponent(double t) const {
    if (model_) return model_->exponent(t);
    const double v = evaluator_(t);
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  }

  double prefactor() const { return model_ ? model_->base * model_->C_ed : 1.0; }

  Envelope with(double C_ed, double rate_constant) const {
    if (!model_) throw DomainError("Envelope: evaluator-only envelopes have no free constants");
    Envelope e = *this;
    e.model_->C_ed = C_ed;
    e.model_->rate_constant = rate_constant;
    e.sync_constants();
    return e;
  }

 private:
  void sync_constants() {
    if (!model_) return;
    constants_["C_ed"] = model_->C_ed;
    constants_["rate_constant"] = model_->rate_constant;
    constants_["prefactor_base"] = model_->base;
  }

  EnvelopeKind kind_;
  std::optional<RateModel> model_;
  std::function<double(double)> evaluator_;
  std::map<std::string, double> constants_;
  bool forced_ = false;
};

struct EnvelopeOptions {
  bool force = false;           // build even when the hypotheses fail
  bool with_prefactor = true;   // include (1 + (|k|/nu)^{1/2})
};

inline double theorem_prefactor(double nu, int k) {
  return 1.0 + std::sqrt(std::abs(static_cast<double>(k)) / nu);
}

/// C_ed (1 + (|k|/nu)^{1/2}) exp(-1/4 (beta nu |k|)^{1/2} int_0^t xi^{1/2} w - 2 nu k^2 t).
inline Envelope thm1_envelope(const Thm1Params& p, const WeightFamily& w, std::shared_ptr<const Modulation> m,
                              double C_ed, EnvelopeOptions opt = {}) {
  const auto adm = classify(*m, p.nu, p.k, w, p.beta, p.ell, p.C, 1.0);
  if (!adm.thm1.admissible && !opt.force) {
    throw UnsupportedError("thm1_envelope: modulation '" + m->name() +
                           "' violates the hypotheses (first violation: " + adm.thm1.violations.front().condition +
                           "); use force to override");
  }
  const double k2 = static_cast<double>(p.k) * p.k;
  const double nu = p.nu;
  RateModel r;
  r.base = opt.with_prefactor ? theorem_prefactor(nu, p.k) : 1.0;
  r.C_ed = C_ed;
  r.rate_constant = 0.25 * std::sqrt(p.beta * nu * std::abs(static_cast<double>(p.k)));
  r.G = [m, w](double t) { return m->weighted_sqrt_integral(0.0, t, w); };
  r.D = [nu, k2](double t) { return 2.0 * nu * k2 * t; };
  Envelope e(w.is_unit() ? EnvelopeKind::Class0 : EnvelopeKind::Thm1, std::move(r),
             {{"beta", p.beta}, {"C", p.C}, {"ell", p.ell}, {"nu", nu}, {"k", p.k},
              {"t_star", adm.thm1.t_star}, {"admissible", adm.thm1.admissible ? 1.0 : 0.0}});
  e.set_forced(!adm.thm1.admissible);
  return e;
}

/// C_ed (1 + (|k|/nu)^{1/2}) exp(-C'_xi (nu |k|)^{1/2} int_0^t xi^3 - 2 nu k^2 t).
inline Envelope thm2_envelope(double nu, int k, double C_xi, double C_xi_prime, std::shared_ptr<const Modulation> m,
                              double C_ed, EnvelopeOptions opt = {}) {
  const double ak = std::abs(static_cast<double>(k));
  const auto adm = classify(*m, nu, k, WeightFamily::unit(), std::min(1.0, nu / ak), 4.0, 1.0, C_xi);
  if (!adm.thm2.admissible && !opt.force) {
    throw UnsupportedError("thm2_envelope: modulation '" + m->name() +
                           "' violates the hypotheses (first violation: " + adm.thm2.violations.front().condition +
                           "); use force to override");
  }
  const double k2 = ak * ak;
  RateModel r;
  r.base = opt.with_prefactor ? theorem_prefactor(nu, k) : 1.0;
  r.C_ed = C_ed;
  r.rate_constant = C_xi_prime * std::sqrt(nu * ak);
  r.G = [m](double t) { return m->power_integral(3.0, 0.0, t); };
  r.D = [nu, k2](double t) { return 2.0 * nu * k2 * t; };
  Envelope e(EnvelopeKind::Thm2, std::move(r),
             {{"C_xi", C_xi}, {"C_xi_prime", C_xi_prime}, {"nu", nu}, {"k", k},
              {"C_xi_prime_ge_nu_over_k", C_xi_prime >= nu / ak ? 1.0 : 0.0},
              {"admissible", adm.thm2.admissible ? 1.0 : 0.0}});
  e.set_forced(!adm.thm2.admissible);
  return e;
}

/// Lowest-mode decay e^{-2 nu (k^2 + 1) t} of the physical mode.
inline Envelope diffusion_envelope(double nu, int k) {
  const double k2 = static_cast<double>(k) * k;
  RateModel r;
  r.rate_constant = 2.0 * nu * (k2 + 1.0);
  r.G = [](double t) { return t; };
  return Envelope(EnvelopeKind::Diffusion, std::move(r), {{"nu", nu}, {"k", k}});
}

/// C_ed e^{-rate t}.
inline Envelope exponential_envelope(double rate, double C_ed = 1.0) {
  RateModel r;
  r.C_ed = C_ed;
  r.rate_constant = rate;
  r.G = [](double t) { return t; };
  return Envelope(EnvelopeKind::Exponential, std::move(r));
}

/// nu^{m/(m+2)} |k|^{2/(m+2)} for nu < |k|, k^2/nu otherwise.
inline double autonomous_rate(double nu, int k, int m) {
  if (m != 1 && m != 2) throw DomainError("autonomous_rate: m must be 1 or 2");
  if (!(nu > 0.0) || k == 0) throw DomainError("autonomous_rate: need nu > 0 and k != 0");
  const double ak = std::abs(static_cast<double>(k));
  if (nu < ak) return std::pow(nu, m / (m + 2.0)) * std::pow(ak, 2.0 / (m + 2.0));
  return ak * ak / nu;
}

inline Envelope autonomous_envelope(double nu, int k, int m, double C_ed = 1.0) {
  RateModel r;
  r.C_ed = C_ed;
  r.rate_constant = autonomous_rate(nu, k, m);
  r.G = [](double t) { return t; };
  return Envelope(EnvelopeKind::Autonomous, std::move(r), {{"nu", nu}, {"k", k}, {"m", m}});
}

/// min{C_mix / (|k| Xi(t))^{1/2}, 1}.
inline Envelope mixing_envelope(int k, std::shared_ptr<const Modulation> m, double C_mix) {
  if (k == 0) throw DomainError("mixing_envelope: k must be nonzero");
  const double ak = std::abs(static_cast<double>(k));
  return Envelope(
      EnvelopeKind::Mixing,
      [m, ak, C_mix](double t) {
        const double x = ak * m->Xi(t);
        if (x <= 0.0) return 1.0;
        return std::min(C_mix / std::sqrt(x), 1.0);
      },
      {{"C_mix", C_mix}, {"k", static_cast<double>(k)}});
}

// ---------------------------------------------------------------------------
// Gluing

/// One interval of a glued envelope; `envelope` is expressed in local time
/// tau = t - t0 on [0, t1 - t0]. Diffusion pieces mark off-intervals.
struct GluePiece {
  double t0 = 0.0;
  double t1 = 0.0;
  Envelope envelope;
};

/// K = max{K_i}^N and C = min{C_i} over the active pieces; the integrand is
/// the concatenation of the per-piece rate integrands. Off-intervals
/// contribute their diffusive exponent unchanged.
inline Envelope glue(const std::vector<GluePiece>& pieces) {
  if (pieces.empty()) throw DomainError("glue: no pieces");
  if (pieces.front().t0 != 0.0) throw DomainError("glue: partition must start at t = 0");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!(pieces[i].t1 > pieces[i].t0)) throw DomainError("glue: empty interval in partition");
    if (i > 0 && pieces[i].t0 != pieces[i - 1].t1) throw DomainError("glue: gap or overlap in partition");
    if (!pieces[i].envelope.model()) throw DomainError("glue: pieces must carry a rate model");
  }
  if (pieces.size() == 1) return pieces.front().envelope;

  double K = 0.0;
  double C = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) {
    K = std::max(K, p.envelope.prefactor());
    if (p.envelope.kind() != EnvelopeKind::Diffusion) C = std::min(C, p.envelope.model()->rate_constant);
  }
  if (!std::isfinite(C)) C = 0.0;
  const auto N = static_cast<double>(pieces.size());

  struct Part {
    double t0, t1;
    bool off;
    RateModel model;
  };
  auto parts = std::make_shared<std::vector<Part>>();
  for (const auto& p : pieces) {
    parts->push_back({p.t0, p.t1, p.envelope.kind() == EnvelopeKind::Diffusion, *p.envelope.model()});
  }

  RateModel r;
  r.base = std::pow(K, N);
  r.C_ed = 1.0;
  r.rate_constant = C;
  r.G = [parts](double t) {
    double total = 0.0;
    for (const auto& p : *parts) {
      if (t <= p.t0) break;
      if (p.off) continue;
      total += p.model.G(std::min(t, p.t1) - p.t0);
    }
    return total;
  };
  r.D = [parts](double t) {
    double total = 0.0;
    for (const auto& p : *parts) {
      if (t <= p.t0) break;
      const double tau = std::min(t, p.t1) - p.t0;
      if (p.off) total += p.model.rate_constant * p.model.G(tau) + (p.model.D ? p.model.D(tau) : 0.0);
      else if (p.model.D) total += p.model.D(tau);
    }
    return total;
  };
  return Envelope(EnvelopeKind::Glued, std::move(r), {{"K", std::pow(K, N)}, {"C", C}, {"pieces", N}});
}

/// The modulation restricted to piece i, re-expressed in local time.
inline std::shared_ptr<const Modulation> local_piece(const Modulation& m, std::size_t i) {
  const auto& p = m.pieces().at(i);
  const double t0 = p.t0;
  Piece q = p;
  q.t0 = 0.0;
  q.t1 = p.t1 - t0;
  switch (p.formula) {
    case Formula::Const: break;
    case Formula::Linear: q.params = {p.params[0] + p.params[1] * t0, p.params[1]}; break;
    case Formula::Exp: q.params = {p.params[0] * std::exp(p.params[1] * t0), p.params[1]}; break;
    case Formula::CosAffine: {
      // a cos(w (tau + t0)) + b is not in the tag set unless w t0 is a
      // multiple of 2 pi; fall back to shifting by a phase multiple.
      const double phase = std::remainder(p.params[1] * t0, kTwoPi);
      if (std::abs(phase) > 1e-12) {
        throw UnsupportedError("local_piece: cos_affine piece does not start at a phase multiple of 2 pi");
      }
      break;
    }
    case Formula::Poly4: q.params = {p.params[0], p.params[1], p.params[2] - t0}; break;
    case Formula::RationalRampdown:
      q.params = {p.params[0], p.params[1] - p.params[0] * t0, p.params[2]};
      break;
  }
  return std::make_shared<const Modulation>(std::vector<Piece>{q}, m.name() + "#" + std::to_string(i));
}

// ---------------------------------------------------------------------------
// Closed-form example exponents in the (nu |k|)^{1/2}-normalised form with
// |k| = 1 and a generic constant C.

/// Example A as displayed: C/4 + (C/2)(nu^{-3/4} + 3 nu^{-1/4} - 2 nu^{-1/2} - 2) (sign dropped).
inline double example_A_exponent_literal(double nu, double C) {
  return C / 4.0 + 0.5 * C * (std::pow(nu, -0.75) + 3.0 * std::pow(nu, -0.25) - 2.0 * std::pow(nu, -0.5) - 2.0);
}

/// Example A from the integrals: C nu^{1/2} [int xi_1^3 + int (1 + nu^{1/4} tau) dtau] with the
/// second integral in the local time of the second interval.
inline double example_A_exponent_direct(double nu, double C) {
  const auto m = builtin("example_A", {nu, std::nullopt, std::nullopt});
  const auto second = local_piece(m, 1);
  const double I1 = m.power_integral(3.0, 0.0, m.pieces()[0].t1);
  const double I2 = second->weighted_sqrt_integral(0.0, second->horizon(), WeightFamily::power(0.25, nu));
  return C * std::sqrt(nu) * (I1 + I2);
}

/// Example B simplified bracket: C (1/(4 nu^{1/2}) - 3/2).
inline double example_B_exponent_literal(double nu, double C) { return C * (0.25 / std::sqrt(nu) - 1.5); }

/// Example B per-interval bracket: C (1/4 + (1 - nu^{1/4})/nu^{1/4} + (1 - nu^{1/4})/(4 nu^{1/2})).
inline double example_B_exponent_unsimplified(double nu, double C) {
  const double q = std::pow(nu, 0.25);
  return C * (0.25 + (1.0 - q) / q + (1.0 - q) / (4.0 * std::sqrt(nu)));
}

/// Example B from the modulation: C nu^{1/2} int_0^{1/nu} xi_B^3.
inline double example_B_exponent_direct(double nu, double C) {
  const auto m = builtin("example_B", {nu, std::nullopt, std::nullopt});
  return C * std::sqrt(nu) * m.power_integral(3.0, 0.0, m.horizon());
}

// ---------------------------------------------------------------------------
// Fitting

enum class FitMode { LeastSquares, Dominating };

struct FitFree {
  bool C_ed = true;
  bool rate_constant = false;
};

struct FitResult {
  Envelope envelope;
  double C_ed = 1.0;
  double rate_constant = 0.0;
  double rms = 0.0;          // RMS of log residuals of the least-squares fit
  bool dominates = false;    // envelope >= E0/E0(0) at every sample
  double min_log_margin = 0.0;
  double ls_C_ed = 1.0;
  double ls_rate_constant = 0.0;
};

/// Fits log(E0(t)/E0(t_0)) against the envelope's log over the free
/// constants. The least-squares solution is always reported; in Dominating
/// mode the returned constants are then relaxed (C_ed raised, or the rate
/// lowered when only the rate is free) until the envelope dominates every
/// sample.
inline FitResult fit_constants(const std::vector<double>& t, const std::vector<double>& E0, const Envelope& family,
                               FitFree free, FitMode mode = FitMode::LeastSquares) {
  if (!family.model()) throw DomainError("fit_constants: envelope has no rate model");
  if (t.size() != E0.size() || t.empty()) throw DomainError("fit_constants: mismatched or empty series");
  const int n_free = static_cast<int>(free.C_ed) + static_cast<int>(free.rate_constant);
  if (n_free == 0) throw DomainError("fit_constants: no free constants");
  for (double e : E0) {
    if (!(e > 0.0)) throw DomainError("fit_constants: E0 must be strictly positive");
  }
  const auto& M = *family.model();
  const std::size_t n = t.size();
  std::vector<double> G(n), y(n);
  bool g_varies = false;
  for (std::size_t i = 0; i < n; ++i) {
    G[i] = M.G(t[i]);
    y[i] = std::log(E0[i] / E0[0]) - std::log(M.base) + (M.D ? M.D(t[i]) : 0.0);
    if (std::abs(G[i] - G[0]) > 0.0) g_varies = true;
  }
  if (static_cast<std::size_t>(n_free) > n || (free.rate_constant && !g_varies)) {
    throw DomainError("fit_constants: fit is under-determined");
  }
  // y = a - r G, a = log C_ed.
  double a = std::log(M.C_ed), r = M.rate_constant;
  if (free.C_ed && free.rate_constant) {
    double sg = 0, sy = 0, sgg = 0, sgy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sg += G[i];
      sy += y[i];
      sgg += G[i] * G[i];
      sgy += G[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    const double det = dn * sgg - sg * sg;
    const double slope = (dn * sgy - sg * sy) / det;
    r = -slope;
    a = (sy - slope * sg) / dn;
  } else if (free.C_ed) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += y[i] + r * G[i];
    a = s / static_cast<double>(n);
  } else {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      num += -G[i] * (y[i] - a);
      den += G[i] * G[i];
    }
    r = num / den;
  }
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double res = y[i] - (a - r * G[i]);
    ss += res * res;
  }
  FitResult out{family.with(std::exp(a), r)};
  out.rms = std::sqrt(ss / static_cast<double>(n));
  out.ls_C_ed = std::exp(a);
  out.ls_rate_constant = r;

  if (mode == FitMode::Dominating) {
    if (free.C_ed) {
      double shift = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) shift = std::max(shift, y[i] - (a - r * G[i]));
      a += std::max(0.0, shift);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (G[i] > 0.0) r = std::min(r, (a - y[i]) / G[i]);
      }
    }
  }
  out.C_ed = std::exp(a);
  out.rate_constant = r;
  out.envelope = family.with(out.C_ed, out.rate_constant);
  out.min_log_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) out.min_log_margin = std::min(out.min_log_margin, (a - r * G[i]) - y[i]);
  out.dominates = out.min_log_margin >= -1e-12;
  return out;
}

struct MixingFit {
  double C_sup = 0.0;  // smallest dominating constant
  double C_ls = 0.0;   // least-squares constant with the slope fixed at -1/2
  double slope = 0.0;  // free log-log slope of ratio against Xi
  bool dominates = false;
};

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Fits min{C/(|k| Xi)^{1/2}, 1} to observed mixing ratios.
inline MixingFit fit_mixing_constant(const std::vector<double>& Xi, const std::vector<double>& ratio, int k) {
  if (Xi.size() != ratio.size() || Xi.empty()) throw DomainError("fit_mixing_constant: mismatched or empty series");
  const double ak = std::abs(static_cast<double>(k));
  MixingFit f;
  double slog = 0;
  std::size_t count = 0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < Xi.size(); ++i) {
    if (!(Xi[i] > 0.0 && ratio[i] > 0.0)) continue;
    const double c = ratio[i] * std::sqrt(ak * Xi[i]);
    f.C_sup = std::max(f.C_sup, c);
    slog += std::log(c);
    ++count;
    xs.push_back(Xi[i]);
    ys.push_back(ratio[i]);
  }
  if (count == 0) throw DomainError("fit_mixing_constant: no positive samples");
  f.C_ls = std::exp(slog / static_cast<double>(count));
  if (xs.size() >= 2) f.slope = loglog_slope(xs, ys);
  f.dominates = true;
  for (std::size_t i = 0; i < Xi.size(); ++i) {
    const double env = Xi[i] > 0.0 ? std::min(f.C_sup / std::sqrt(ak * Xi[i]), 1.0) : 1.0;
    if (ratio[i] > env * (1 + 1e-12)) f.dominates = false;
  }
  return f;
}

}  // namespace shearlab
