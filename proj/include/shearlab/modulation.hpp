#pragma once

// Piecewise time modulations xi(t) >= 0 with exact antiderivatives, the
// weight family w(t) = 1/(1 + nu^s t), and admissibility classification of a
// modulation against the growth/decay hypotheses of the two decay theorems.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shearlab/error.hpp"
#include "shearlab/quadrature.hpp"

namespace shearlab {

enum class Formula { Const, Linear, Exp, CosAffine, Poly4, RationalRampdown };

//   const              [c]            c
//   linear             [a, b]         a + b t
//   exp                [a, r]         a e^{r t}
//   cos_affine         [a, w, b]      a cos(w t) + b
//   poly4              [a, b, s]      a (1 + b (t - s))^4
//   rational_rampdown  [p, q, r]      (p t - q) / r
inline std::size_t formula_arity(Formula f) {
  switch (f) {
    case Formula::Const: return 1;
    case Formula::Linear: return 2;
    case Formula::Exp: return 2;
    case Formula::CosAffine: return 3;
    case Formula::Poly4: return 3;
    case Formula::RationalRampdown: return 3;
  }
  return 0;
}

inline std::string_view formula_name(Formula f) {
  switch (f) {
    case Formula::Const: return "const";
    case Formula::Linear: return "linear";
    case Formula::Exp: return "exp";
    case Formula::CosAffine: return "cos_affine";
    case Formula::Poly4: return "poly4";
    case Formula::RationalRampdown: return "rational_rampdown";
  }
  return "?";
}

inline Formula parse_formula(std::string_view name) {
  for (Formula f : {Formula::Const, Formula::Linear, Formula::Exp, Formula::CosAffine,
                    Formula::Poly4, Formula::RationalRampdown}) {
    if (formula_name(f) == name) return f;
  }
  throw ConfigError("unknown modulation formula '" + std::string(name) + "'");
}

/// One piece of a modulation: the formula applies on [t0, t1), in absolute
/// time.
struct Piece {
  double t0 = 0.0;
  double t1 = 0.0;
  Formula formula = Formula::Const;
  std::vector<double> params;

  double value(double t) const {
    const auto& p = params;
    switch (formula) {
      case Formula::Const: return p[0];
      case Formula::Linear: return p[0] + p[1] * t;
      case Formula::Exp: return p[0] * std::exp(p[1] * t);
      case Formula::CosAffine: return p[0] * std::cos(p[1] * t) + p[2];
      case Formula::Poly4: {
        const double u = 1.0 + p[1] * (t - p[2]);
        return p[0] * (u * u) * (u * u);
      }
      case Formula::RationalRampdown: return (p[0] * t - p[1]) / p[2];
    }
    return 0.0;
  }

  /// Exact integral of xi over [a, b] within this piece.
  double integral(double a, double b) const {
    const auto& p = params;
    switch (formula) {
      case Formula::Const: return p[0] * (b - a);
      case Formula::Linear: return p[0] * (b - a) + 0.5 * p[1] * (b - a) * (b + a);
      case Formula::Exp:
        if (p[1] == 0.0) return p[0] * (b - a);
        return p[0] * std::exp(p[1] * a) * std::expm1(p[1] * (b - a)) / p[1];
      case Formula::CosAffine:
        if (p[1] == 0.0) return (p[0] + p[2]) * (b - a);
        return p[0] * (std::sin(p[1] * b) - std::sin(p[1] * a)) / p[1] + p[2] * (b - a);
      case Formula::Poly4:
        return power_integral(1.0, a, b).value();
      case Formula::RationalRampdown:
        return (0.5 * p[0] * (b - a) * (b + a) - p[1] * (b - a)) / p[2];
    }
    return 0.0;
  }

  /// Exact integral of xi^q over [a, b] where an elementary antiderivative
  /// exists; nullopt otherwise.
  std::optional<double> power_integral(double q, double a, double b) const {
    const auto& p = params;
    auto pw = [q](double base) { return std::pow(std::max(0.0, base), q); };
    switch (formula) {
      case Formula::Const: return pw(p[0]) * (b - a);
      case Formula::Linear: {
        if (p[1] == 0.0) return pw(p[0]) * (b - a);
        const double fa = std::max(0.0, p[0] + p[1] * a), fb = std::max(0.0, p[0] + p[1] * b);
        return (std::pow(fb, q + 1) - std::pow(fa, q + 1)) / ((q + 1) * p[1]);
      }
      case Formula::Exp: {
        const double rate = q * p[1];
        if (rate == 0.0) return pw(p[0]) * (b - a);
        return pw(p[0]) * std::exp(rate * a) * std::expm1(rate * (b - a)) / rate;
      }
      case Formula::CosAffine:
        if (q == 1.0) return integral(a, b);
        if (p[0] == 0.0 || p[1] == 0.0) return pw(p[0] * (p[1] == 0.0 ? 1.0 : 0.0) + p[2]) * (b - a);
        return std::nullopt;
      case Formula::Poly4: {
        if (p[1] == 0.0) return pw(p[0]) * (b - a);
        const double ua = std::max(0.0, 1.0 + p[1] * (a - p[2]));
        const double ub = std::max(0.0, 1.0 + p[1] * (b - p[2]));
        const double e = 4.0 * q + 1.0;
        return pw(p[0]) * (std::pow(ub, e) - std::pow(ua, e)) / (e * p[1]);
      }
      case Formula::RationalRampdown: {
        if (p[0] == 0.0) return pw(-p[1] / p[2]) * (b - a);
        const double fa = std::max(0.0, (p[0] * a - p[1]) / p[2]);
        const double fb = std::max(0.0, (p[0] * b - p[1]) / p[2]);
        return p[2] / (p[0] * (q + 1)) * (std::pow(fb, q + 1) - std::pow(fa, q + 1));
      }
    }
    return std::nullopt;
  }

  /// Exact integral of xi^{1/2}(t) / (1 + c (t - origin)) over [a, b] where
  /// available (c > 0).
  std::optional<double> weighted_sqrt_integral(double a, double b, double c,
                                               double origin) const {
    const auto& p = params;
    const double x0 = 1.0 + c * (a - origin);
    const double log_ratio = std::log1p(c * (b - a) / x0);
    switch (formula) {
      case Formula::Const: return std::sqrt(std::max(0.0, p[0])) * log_ratio / c;
      case Formula::Poly4: {
        // 1 + b(t - s) = P + Q X with X = 1 + c (t - origin).
        const double q = p[1] / c;
        const double pp = 1.0 + p[1] * (origin - p[2]) - q;
        const double dx = c * (b - a);
        const double x1 = x0 + dx;
        const double inner = pp * pp * log_ratio + 2.0 * pp * q * dx + 0.5 * q * q * dx * (x0 + x1);
        return std::sqrt(std::max(0.0, p[0])) * inner / c;
      }
      default: return std::nullopt;
    }
  }
};

/// w(t) = 1/(1 + nu^s t), or w = 1 for the "unit" sentinel.
class WeightFamily {
 public:
  static WeightFamily unit() { return WeightFamily(std::nullopt, 1.0); }
  static WeightFamily power(double s, double nu) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("WeightFamily: s must be finite and >= 0");
    if (!(nu > 0.0)) throw DomainError("WeightFamily: nu must be positive");
    return WeightFamily(s, nu);
  }

  bool is_unit() const noexcept { return !s_; }
  std::optional<double> s() const noexcept { return s_; }
  double nu() const noexcept { return nu_; }
  /// nu^s, zero for the unit sentinel.
  double rate() const noexcept { return s_ ? std::pow(nu_, *s_) : 0.0; }

  double operator()(double t) const noexcept { return 1.0 / (1.0 + rate() * t); }

  /// d/dt w^n = -n nu^s w^{n+1}.
  double power_derivative(int n, double t) const noexcept {
    return -n * rate() * std::pow((*this)(t), n + 1);
  }

  std::string describe() const {
    return s_ ? "s=" + std::to_string(*s_) : std::string("unit");
  }

 private:
  WeightFamily(std::optional<double> s, double nu) : s_(s), nu_(nu) {}
  std::optional<double> s_;
  double nu_;
};

class Modulation {
 public:
  static constexpr int kProbesPerPiece = 1000;

  Modulation(std::vector<Piece> pieces, std::string name = "custom")
      : pieces_(std::move(pieces)), name_(std::move(name)) {
    if (pieces_.empty()) throw DomainError("Modulation: at least one piece is required");
    if (pieces_.front().t0 != 0.0) throw DomainError("Modulation: first piece must start at t = 0");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& p = pieces_[i];
      if (!(p.t1 > p.t0) || !std::isfinite(p.t1)) {
        throw DomainError("Modulation: piece " + std::to_string(i) + " has an empty or invalid interval");
      }
      if (i > 0 && p.t0 != pieces_[i - 1].t1) {
        throw DomainError("Modulation: pieces " + std::to_string(i - 1) + " and " + std::to_string(i) +
                          " leave a gap or overlap");
      }
      if (p.params.size() != formula_arity(p.formula)) {
        throw DomainError("Modulation: formula '" + std::string(formula_name(p.formula)) + "' expects " +
                          std::to_string(formula_arity(p.formula)) + " parameters");
      }
      for (double v : p.params) {
        if (!std::isfinite(v)) throw DomainError("Modulation: non-finite parameter");
      }
      for (int j = 0; j <= kProbesPerPiece; ++j) {
        const double t = p.t0 + (p.t1 - p.t0) * j / kProbesPerPiece;
        const double v = p.value(t);
        if (!(v >= -1e-12 * std::max(1.0, std::abs(v)))) {
          throw DomainError("Modulation: xi is negative at t = " + std::to_string(t));
        }
      }
    }
    prefix_.resize(pieces_.size() + 1, 0.0);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      prefix_[i + 1] = prefix_[i] + pieces_[i].integral(pieces_[i].t0, pieces_[i].t1);
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  double horizon() const noexcept { return pieces_.back().t1; }

  /// Interior breakpoints (piece boundaries strictly inside (0, T)).
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (std::size_t i = 1; i < pieces_.size(); ++i) b.push_back(pieces_[i].t0);
    return b;
  }

  /// Index of the piece containing t, with right-limit convention at
  /// breakpoints; the final instant T belongs to the last piece.
  std::size_t piece_index(double t) const {
    check_time(t, "piece_index");
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                               [](double x, const Piece& p) { return x < p.t1; });
    if (it == pieces_.end()) return pieces_.size() - 1;
    return static_cast<std::size_t>(it - pieces_.begin());
  }

  double xi(double t) const { return std::max(0.0, pieces_[piece_index(t)].value(t)); }

  /// Left-limit of xi at t > 0.
  double xi_left(double t) const {
    check_time(t, "xi_left");
    if (t == 0.0) return xi(0.0);
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), t,
                               [](const Piece& p, double x) { return p.t1 < x; });
    if (it == pieces_.end()) --it;
    return std::max(0.0, it->value(t));
  }

  /// Xi(t) = integral of xi over [0, t], closed form.
  double Xi(double t) const {
    const std::size_t i = piece_index(t);
    return prefix_[i] + pieces_[i].integral(pieces_[i].t0, t);
  }

  /// Xi(t) by adaptive quadrature (reference path).
  double Xi_quadrature(double t, QuadratureOptions opt = {}) const {
    return integrate([](double x, double) { return x; }, 0.0, t, opt);
  }

  /// Integral of g(xi(t), t) over [a, b] by per-piece adaptive quadrature,
  /// using each piece's formula on its closed interval.
  template <class G>
  double integrate(const G& g, double a, double b, QuadratureOptions opt = {}) const {
    check_time(a, "integrate");
    check_time(b, "integrate");
    double total = 0.0;
    for (const auto& p : pieces_) {
      const double lo = std::max(a, p.t0), hi = std::min(b, p.t1);
      if (hi <= lo) continue;
      total += adaptive_simpson([&](double t) { return g(std::max(0.0, p.value(t)), t); }, lo, hi, opt);
    }
    return total;
  }

  /// Integral of xi^q over [a, b]: closed form per piece where one exists,
  /// quadrature otherwise.
  double power_integral(double q, double a, double b) const {
    check_time(a, "power_integral");
    check_time(b, "power_integral");
    double total = 0.0;
    for (const auto& p : pieces_) {
      const double lo = std::max(a, p.t0), hi = std::min(b, p.t1);
      if (hi <= lo) continue;
      if (auto v = p.power_integral(q, lo, hi)) {
        total += *v;
      } else {
        total += adaptive_simpson([&](double t) { return std::pow(std::max(0.0, p.value(t)), q); }, lo, hi);
      }
    }
    return total;
  }

  /// Integral over [a, b] of xi^{1/2}(t) w(t - origin), exact where the
  /// piece admits it.
  double weighted_sqrt_integral(double a, double b, const WeightFamily& w, double origin = 0.0) const {
    if (w.is_unit()) return power_integral(0.5, a, b);
    check_time(a, "weighted_sqrt_integral");
    check_time(b, "weighted_sqrt_integral");
    const double c = w.rate();
    double total = 0.0;
    for (const auto& p : pieces_) {
      const double lo = std::max(a, p.t0), hi = std::min(b, p.t1);
      if (hi <= lo) continue;
      if (auto v = p.weighted_sqrt_integral(lo, hi, c, origin)) {
        total += *v;
      } else {
        total += adaptive_simpson(
            [&](double t) { return std::sqrt(std::max(0.0, p.value(t))) * w(t - origin); }, lo, hi);
      }
    }
    return total;
  }

  double weighted_sqrt_integral_quadrature(double a, double b, const WeightFamily& w,
                                           double origin = 0.0) const {
    return integrate([&](double x, double t) { return std::sqrt(x) * w(t - origin); }, a, b);
  }

  /// Probe times: kProbesPerPiece + 1 uniformly spaced points per piece
  /// (both ends included).
  template <class F>
  void for_each_probe(const F& f) const {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& p = pieces_[i];
      for (int j = 0; j <= kProbesPerPiece; ++j) {
        const double t = j == kProbesPerPiece ? p.t1 : p.t0 + (p.t1 - p.t0) * j / kProbesPerPiece;
        f(i, t, std::max(0.0, p.value(t)));
      }
    }
  }

  double max_xi() const {
    double m = 0.0;
    for_each_probe([&](std::size_t, double, double v) { m = std::max(m, v); });
    return m;
  }
  double min_xi() const {
    double m = std::numeric_limits<double>::infinity();
    for_each_probe([&](std::size_t, double, double v) { m = std::min(m, v); });
    return m;
  }

 private:
  void check_time(double t, const char* what) const {
    if (!(t >= 0.0 && t <= horizon())) {
      throw DomainError(std::string(what) + ": t = " + std::to_string(t) + " outside [0, " +
                        std::to_string(horizon()) + "]");
    }
  }

  std::vector<Piece> pieces_;
  std::string name_;
  std::vector<double> prefix_;
};

struct BuiltinParams {
  std::optional<double> nu;
  std::optional<double> horizon;
  std::optional<double> value;  // level of the constant builtin (default 1)
};

inline std::vector<std::string> builtin_names() {
  return {"constant", "zero", "exp_nu", "exp_unit", "oscillatory", "poly", "example_A", "example_B"};
}

/// Built-in modulations. Horizons default to 1/nu, except poly (nu^{-1/2})
/// and the two composite examples, whose horizons are fixed by their
/// construction.
inline Modulation builtin(const std::string& name, const BuiltinParams& params) {
  auto need_nu = [&]() {
    if (!params.nu) throw ConfigError("modulation '" + name + "' requires nu");
    if (!(*params.nu > 0.0 && *params.nu < 1.0)) {
      throw ConfigError("modulation '" + name + "' requires 0 < nu < 1");
    }
    return *params.nu;
  };
  auto horizon_or = [&](auto fallback) {
    if (params.horizon) {
      if (!(*params.horizon > 0.0)) throw ConfigError("modulation horizon must be positive");
      return *params.horizon;
    }
    return fallback();
  };
  auto single = [&](Formula f, std::vector<double> p, double T) {
    return Modulation({Piece{0.0, T, f, std::move(p)}}, name);
  };
  const auto inv_nu = [&]() { return 1.0 / need_nu(); };

  if (name == "constant") return single(Formula::Const, {params.value.value_or(1.0)}, horizon_or(inv_nu));
  if (name == "zero") return single(Formula::Const, {0.0}, horizon_or(inv_nu));
  if (name == "exp_nu") {
    const double nu = need_nu();
    return single(Formula::Exp, {1.0, -nu}, horizon_or(inv_nu));
  }
  if (name == "exp_unit") return single(Formula::Exp, {1.0, -1.0}, horizon_or(inv_nu));
  if (name == "oscillatory") return single(Formula::CosAffine, {0.25, 1.0, 0.5}, horizon_or(inv_nu));
  if (name == "poly") {
    const double nu = need_nu();
    return single(Formula::Poly4, {1.0, std::pow(nu, 0.25), 0.0},
                  horizon_or([&] { return std::pow(nu, -0.5); }));
  }
  if (name == "example_A") {
    const double nu = need_nu();
    const double t1 = std::pow(nu, -0.5), t2 = std::pow(nu, -0.75);
    return Modulation({Piece{0.0, t1, Formula::Linear, {0.0, std::sqrt(nu)}},
                       Piece{t1, t2, Formula::Poly4, {1.0, std::pow(nu, 0.25), t1}}},
                      name);
  }
  if (name == "example_B") {
    const double nu = need_nu();
    const double t1 = std::pow(nu, -0.5), t2 = std::pow(nu, -0.75), t3 = 1.0 / nu;
    return Modulation({Piece{0.0, t1, Formula::Linear, {0.0, std::sqrt(nu)}},
                       Piece{t1, t2, Formula::Const, {1.0}},
                       Piece{t2, t3, Formula::RationalRampdown, {nu, 1.0, std::pow(nu, 0.25) - 1.0}}},
                      name);
  }
  throw ConfigError("unknown builtin modulation '" + name + "'");
}

// ---------------------------------------------------------------------------
// Admissibility

struct Violation {
  std::string condition;
  double t = 0.0;
  double value = 0.0;
  double bound = 0.0;
};

/// Lower and upper envelopes for xi under the first theorem:
/// L(t) = C^2 beta^2 for t <= t*, (nu/(|k| beta)) w^{-2} after, U = w^{-ell}.
struct Thm1Bounds {
  double nu = 0.0;
  int k = 1;
  WeightFamily weights = WeightFamily::unit();
  double beta = 0.0;
  double ell = 4.0;
  double C = 1.0;

  double bracket() const {
    return std::sqrt(std::abs(static_cast<double>(k))) * C * std::pow(beta, 1.5) / std::sqrt(nu) - 1.0;
  }
  // Variant with the additional nu^{1/2} factor inside the bracket.
  double bracket_proof_variant() const {
    return std::sqrt(std::abs(static_cast<double>(k))) * C * std::pow(beta, 1.5) - 1.0;
  }
  static double switch_time(double bracket, const WeightFamily& w) {
    if (bracket <= 0.0) return 0.0;
    if (w.is_unit()) return std::numeric_limits<double>::infinity();
    return bracket / w.rate();
  }
  double t_star() const { return switch_time(bracket(), weights); }
  double t_star_proof_variant() const { return switch_time(bracket_proof_variant(), weights); }

  double static_lower() const { return C * C * beta * beta; }
  double dynamic_lower(double t) const {
    const double wt = weights(t);
    return nu / (std::abs(static_cast<double>(k)) * beta) / (wt * wt);
  }
  double lower(double t) const { return t <= t_star() ? static_lower() : dynamic_lower(t); }
  double upper(double t) const { return std::pow(weights(t), -ell); }
};

struct Thm1Report {
  bool admissible = false;
  double beta = 0.0;
  std::optional<double> s;  // empty for unit weight
  double ell = 0.0;
  double C = 0.0;
  double t_star = 0.0;
  double t_star_proof_variant = 0.0;
  std::vector<Violation> violations;
};

struct Thm2Report {
  bool admissible = false;
  double C_xi = 0.0;
  double slope_bound = 0.0;  // C_xi (nu |k|)^{1/2}
  std::vector<Violation> violations;
  // Sufficient condition used in the proof: xi' <= C_xi^{-1/2} |k|^{1/2} nu^{1/2} / 100.
  bool proof_condition = false;
  double proof_slope_bound = 0.0;
  std::vector<Violation> proof_violations;
};

struct IntervalLabel {
  double t0 = 0.0;
  double t1 = 0.0;
  std::string label;  // "thm1", "thm2", "off" or "none"
  bool thm1 = false;
  bool thm2 = false;
};

struct AdmissibilityReport {
  double nu = 0.0;
  int k = 1;
  Thm1Report thm1;
  Thm2Report thm2;
  std::vector<IntervalLabel> per_interval;
};

namespace detail {

inline double rel_slack(double bound) { return 1e-12 * std::max(1.0, std::abs(bound)); }

// First violation of each condition is recorded.
inline void note(std::vector<Violation>& out, const std::string& cond, double t, double value,
                 double bound) {
  for (const auto& v : out) {
    if (v.condition == cond) return;
  }
  out.push_back({cond, t, value, bound});
}

struct SlopeSample {
  double slope;
  double roundoff;
};

// Finite-difference derivative of a piece's formula, one-sided at its ends.
inline SlopeSample piece_slope(const Piece& p, double t) {
  const double len = p.t1 - p.t0;
  const double h = std::min(1e-3, len / 1000.0);
  double a = t - h, b = t + h;
  if (a < p.t0) {
    a = t;
    b = t + h;
  } else if (b > p.t1) {
    a = t - h;
    b = t;
  }
  const double fa = p.value(a), fb = p.value(b);
  const double eps = std::numeric_limits<double>::epsilon();
  return {(fb - fa) / (b - a), 8.0 * eps * (std::abs(fa) + std::abs(fb) + 1.0) / (b - a)};
}

template <class Bounds>
void check_thm1_on(const Piece& p, double origin, const Bounds& b, std::vector<Violation>& out) {
  for (int j = 0; j <= Modulation::kProbesPerPiece; ++j) {
    const double t = j == Modulation::kProbesPerPiece ? p.t1
                                                      : p.t0 + (p.t1 - p.t0) * j / Modulation::kProbesPerPiece;
    const double x = std::max(0.0, p.value(t));
    const double tau = t - origin;
    const double lo = b.lower(tau);
    const double hi = b.upper(tau);
    if (x < lo - rel_slack(lo)) note(out, tau <= b.t_star() ? "lower_static" : "lower_dynamic", t, x, lo);
    if (x > hi + rel_slack(hi)) note(out, "upper", t, x, hi);
  }
}

inline void check_thm2_on(const Piece& p, double slope_bound, double proof_bound,
                          std::vector<Violation>& out, std::vector<Violation>& proof_out) {
  for (int j = 0; j <= Modulation::kProbesPerPiece; ++j) {
    const double t = j == Modulation::kProbesPerPiece ? p.t1
                                                      : p.t0 + (p.t1 - p.t0) * j / Modulation::kProbesPerPiece;
    const double x = std::max(0.0, p.value(t));
    if (x > 1.0 + rel_slack(1.0)) note(out, "xi_le_1", t, x, 1.0);
    const auto s = piece_slope(p, t);
    if (s.slope > slope_bound + rel_slack(slope_bound) + s.roundoff) note(out, "slope", t, s.slope, slope_bound);
    if (s.slope > proof_bound + rel_slack(proof_bound) + s.roundoff) {
      note(proof_out, "proof_slope", t, s.slope, proof_bound);
    }
  }
}

inline bool piece_is_off(const Piece& p) {
  for (int j = 0; j <= Modulation::kProbesPerPiece; ++j) {
    const double t = p.t0 + (p.t1 - p.t0) * j / Modulation::kProbesPerPiece;
    if (p.value(t) > 0.0) return false;
  }
  return true;
}

}  // namespace detail

/// Tests the hypotheses of both theorems by dense probing (1001 probes per
/// piece, ends included). The whole-modulation checks use global time; the
/// per-interval labels restart time (and the weight) at each piece start.
inline AdmissibilityReport classify(const Modulation& m, double nu, int k, const WeightFamily& weights,
                                    double beta, double ell, double C, double C_xi) {
  AdmissibilityReport r;
  r.nu = nu;
  r.k = k;
  const double ak = std::abs(static_cast<double>(k));

  Thm1Bounds b{nu, k, weights, beta, ell, C};
  r.thm1.beta = beta;
  r.thm1.s = weights.s();
  r.thm1.ell = ell;
  r.thm1.C = C;
  bool params_ok = true;
  if (!(nu > 0.0)) {
    detail::note(r.thm1.violations, "nu_positive", 0.0, nu, 0.0);
    params_ok = false;
  }
  if (k == 0) {
    detail::note(r.thm1.violations, "k_nonzero", 0.0, 0.0, 0.0);
    params_ok = false;
  }
  if (params_ok && !(beta >= nu / ak * (1 - 1e-12) && beta <= 1.0)) {
    detail::note(r.thm1.violations, "beta_range", 0.0, beta, nu / ak);
    params_ok = false;
  }
  if (!(ell >= 2.0 && ell <= 4.0)) {
    detail::note(r.thm1.violations, "ell_range", 0.0, ell, 4.0);
    params_ok = false;
  }
  if (params_ok) {
    r.thm1.t_star = b.t_star();
    r.thm1.t_star_proof_variant = b.t_star_proof_variant();
    for (const auto& p : m.pieces()) detail::check_thm1_on(p, 0.0, b, r.thm1.violations);
  }
  r.thm1.admissible = r.thm1.violations.empty();

  r.thm2.C_xi = C_xi;
  r.thm2.slope_bound = C_xi * std::sqrt(std::max(0.0, nu) * ak);
  r.thm2.proof_slope_bound =
      C_xi > 0.0 ? 0.01 / std::sqrt(C_xi) * std::sqrt(ak) * std::sqrt(std::max(0.0, nu)) : 0.0;
  for (const auto& p : m.pieces()) {
    detail::check_thm2_on(p, r.thm2.slope_bound, r.thm2.proof_slope_bound, r.thm2.violations,
                          r.thm2.proof_violations);
  }
  r.thm2.admissible = r.thm2.violations.empty();
  r.thm2.proof_condition = r.thm2.proof_violations.empty();

  for (const auto& p : m.pieces()) {
    IntervalLabel lab{p.t0, p.t1, "none", false, false};
    if (detail::piece_is_off(p)) {
      lab.label = "off";
      r.per_interval.push_back(lab);
      continue;
    }
    if (params_ok) {
      std::vector<Violation> v1;
      detail::check_thm1_on(p, p.t0, b, v1);
      lab.thm1 = v1.empty();
    }
    std::vector<Violation> v2, unused;
    detail::check_thm2_on(p, r.thm2.slope_bound, r.thm2.proof_slope_bound, v2, unused);
    lab.thm2 = v2.empty();
    lab.label = lab.thm1 ? "thm1" : lab.thm2 ? "thm2" : "none";
    r.per_interval.push_back(lab);
  }
  return r;
}

struct Figure1Row {
  double t;
  double xi;
  double lower;
  double upper;
};

/// xi(t) together with the admissible band [L(t), U(t)] on n + 1 uniform
/// samples of [0, T].
inline std::vector<Figure1Row> figure1_samples(const Modulation& m, const Thm1Bounds& b, int n) {
  if (n < 1) throw DomainError("figure1_samples: need at least one interval");
  std::vector<Figure1Row> rows;
  rows.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = i == n ? m.horizon() : m.horizon() * i / n;
    rows.push_back({t, m.xi(t), b.lower(t), b.upper(t)});
  }
  return rows;
}

}  // namespace shearlab
