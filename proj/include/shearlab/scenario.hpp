#pragma once

// Scenario documents: one JSON object per scenario, parsed strictly
// (unknown keys and wrongly typed values are rejected).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shearlab/error.hpp"
#include "shearlab/fields.hpp"
#include "shearlab/modulation.hpp"
#include "shearlab/random.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/solver.hpp"

namespace shearlab {

struct ProfileSpec {
  std::string name = "kolmogorov";  // kolmogorov, two_mode or tabulated
  double a = 0.5;
  std::vector<double> samples;

  ShearProfile build() const {
    if (name == "kolmogorov") return ShearProfile::kolmogorov();
    if (name == "two_mode") return ShearProfile::two_mode(a);
    if (name == "tabulated") return ShearProfile::tabulated(samples);
    throw ConfigError("unknown profile '" + name + "'");
  }
};

struct ModulationSpec {
  std::optional<std::string> builtin;
  BuiltinParams params;
  std::vector<Piece> pieces;

  Modulation build(double scenario_nu) const {
    if (builtin) {
      BuiltinParams p = params;
      if (!p.nu && scenario_nu > 0.0 && scenario_nu < 1.0) p.nu = scenario_nu;
      return shearlab::builtin(*builtin, p);
    }
    try {
      return Modulation(pieces, "custom");
    } catch (const DomainError& e) {
      throw ConfigError(std::string("modulation: ") + e.what());
    }
  }
};

struct InitialSpec {
  enum class Kind { SingleMode, RandomBandlimited, Tabulated };
  Kind kind = Kind::SingleMode;
  int mode = 1;
  std::optional<std::uint64_t> seed;  // defaults to the scenario seed
  int bandwidth = 8;
  std::vector<double> re, im;

  ComplexField build(const PeriodicGrid& grid, int k, std::uint64_t scenario_seed) const {
    switch (kind) {
      case Kind::SingleMode:
        if (std::abs(mode) > grid.max_wavenumber()) throw ConfigError("initial: mode exceeds grid resolution");
        return ComplexField::single_mode(grid, k, mode);
      case Kind::RandomBandlimited: {
        if (bandwidth < 1 || bandwidth >= grid.max_wavenumber()) {
          throw ConfigError("initial: bandwidth must lie in [1, n_points/2)");
        }
        const CounterRng rng(seed.value_or(scenario_seed), 1);
        std::vector<Complex> c(grid.size());
        std::uint64_t counter = 0;
        for (int n = -bandwidth; n <= bandwidth; ++n) {
          const std::size_t slot = n >= 0 ? static_cast<std::size_t>(n) : grid.size() - static_cast<std::size_t>(-n);
          const double re_c = rng.normal(counter++);
          const double im_c = rng.normal(counter++);
          c[slot] = Complex(re_c, im_c);
        }
        // Normalise to |theta|^2 = 2 pi.
        double norm = 0.0;
        for (const auto& z : c) norm += std::norm(z);
        const double scale = 1.0 / std::sqrt(norm);
        for (auto& z : c) z *= scale;
        return ComplexField::from_coefficients(grid, k, c);
      }
      case Kind::Tabulated: {
        if (re.size() != grid.size() || (!im.empty() && im.size() != grid.size())) {
          throw ConfigError("initial: tabulated values must have n_points entries");
        }
        std::vector<Complex> v(grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = Complex(re[j], im.empty() ? 0.0 : im[j]);
        return ComplexField(grid, std::move(v), k);
      }
    }
    throw ConfigError("initial: unknown kind");
  }
};

struct SolverSpec {
  std::optional<double> dt;
  std::size_t n_points = 128;
  std::size_t save_every = 1;
  Scheme scheme = Scheme::Strang;
  std::optional<double> T;
};

struct ConstantsSpec {
  std::optional<double> C, C_sp, beta, ell, C_xi, C_xi_prime, C_ed, C_mix;
  std::size_t spectral_trials = 200;
};

struct EnvelopeSpec {
  std::string kind = "thm1";
  std::size_t samples = 201;
  bool log_spacing = false;
  std::optional<int> m;
  bool with_prefactor = true;
};

struct MixingSpec {
  double Xi_min = 1e2;
  double Xi_max = 1e4;
  std::size_t samples = 41;
};

struct Figure2Spec {
  double C = 1.0;
  std::size_t samples = 401;
};

struct SweepSpec {
  std::string command = "simulate";
  std::vector<double> nu;
  std::vector<int> k;
};

struct Scenario {
  std::string name = "scenario";
  double nu = 0.0;
  int k = 1;
  std::uint64_t seed = 0;
  ProfileSpec profile;
  ModulationSpec modulation;
  std::optional<double> weight_s;  // empty: unit weight
  SolverSpec solver;
  InitialSpec initial;
  ConstantsSpec constants;
  std::vector<std::string> checks;
  std::optional<std::vector<std::string>> outputs;
  EnvelopeSpec envelope;
  MixingSpec mixing;
  Figure2Spec figure2;
  SweepSpec sweep;
  Json source;

  WeightFamily weights() const {
    if (!weight_s) return WeightFamily::unit();
    if (!(nu > 0.0)) throw ConfigError("weight: a power weight needs nu > 0");
    return WeightFamily::power(*weight_s, nu);
  }

  bool wants(const std::string& output) const {
    if (!outputs) return true;
    for (const auto& o : *outputs) {
      if (o == output) return true;
    }
    return false;
  }
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

inline void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) config_fail(where, "expected an object");
}

inline void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
  require_object(j, where);
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) config_fail(where, "unknown key '" + it.key() + "'");
  }
}

inline double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) config_fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_fail(where, "expected a finite number");
  return v;
}

inline long long as_integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) config_fail(where, "expected an integer");
  return j.get<long long>();
}

inline std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) config_fail(where, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> as_numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) config_fail(where, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline std::vector<std::string> as_strings(const Json& j, const std::string& where) {
  if (!j.is_array()) config_fail(where, "expected an array of strings");
  std::vector<std::string> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_string(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline std::size_t as_count(const Json& j, const std::string& where, long long min) {
  const auto v = as_integer(j, where);
  if (v < min) config_fail(where, "must be at least " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

inline void require_member_of(const std::string& value, const std::string& where,
                              std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  config_fail(where, "unsupported value '" + value + "'");
}

}  // namespace detail

inline Scenario parse_scenario(const Json& doc) {
  using namespace detail;
  allow_keys(doc, "scenario",
             {"name", "nu", "k", "seed", "profile", "modulation", "weight", "solver", "initial", "constants",
              "checks", "outputs", "envelope", "mixing", "figure2", "sweep"});
  Scenario s;
  s.source = doc;
  if (doc.contains("name")) s.name = as_string(doc["name"], "name");
  if (!doc.contains("nu")) config_fail("scenario", "missing required key 'nu'");
  s.nu = as_number(doc["nu"], "nu");
  if (s.nu < 0.0) config_fail("nu", "must be >= 0");
  if (doc.contains("k")) {
    const auto k = as_integer(doc["k"], "k");
    if (k == 0) config_fail("k", "must be nonzero");
    s.k = static_cast<int>(k);
  }
  if (doc.contains("seed")) {
    const auto seed = as_integer(doc["seed"], "seed");
    if (seed < 0) config_fail("seed", "must be nonnegative");
    s.seed = static_cast<std::uint64_t>(seed);
  }

  if (doc.contains("profile")) {
    const auto& p = doc["profile"];
    allow_keys(p, "profile", {"name", "parameters", "tabulated"});
    if (p.contains("tabulated")) {
      if (p.contains("name") || p.contains("parameters")) config_fail("profile", "tabulated excludes name/parameters");
      s.profile.name = "tabulated";
      s.profile.samples = as_numbers(p["tabulated"], "profile.tabulated");
      if (s.profile.samples.size() < 8) config_fail("profile.tabulated", "need at least 8 samples");
    } else {
      if (!p.contains("name")) config_fail("profile", "missing 'name' or 'tabulated'");
      s.profile.name = as_string(p["name"], "profile.name");
      require_member_of(s.profile.name, "profile.name", {"kolmogorov", "two_mode"});
      if (p.contains("parameters")) {
        const auto& q = p["parameters"];
        if (s.profile.name == "kolmogorov") {
          allow_keys(q, "profile.parameters", {});
        } else {
          allow_keys(q, "profile.parameters", {"a"});
          if (q.contains("a")) s.profile.a = as_number(q["a"], "profile.parameters.a");
        }
      }
    }
  }

  if (!doc.contains("modulation")) config_fail("scenario", "missing required key 'modulation'");
  {
    const auto& m = doc["modulation"];
    if (m.contains("pieces")) {
      allow_keys(m, "modulation", {"pieces"});
      const auto& ps = m["pieces"];
      if (!ps.is_array() || ps.empty()) config_fail("modulation.pieces", "expected a non-empty array");
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const std::string w = "modulation.pieces[" + std::to_string(i) + "]";
        allow_keys(ps[i], w, {"t0", "t1", "formula", "params"});
        for (const char* key : {"t0", "t1", "formula", "params"}) {
          if (!ps[i].contains(key)) config_fail(w, std::string("missing '") + key + "'");
        }
        Piece piece;
        piece.t0 = as_number(ps[i]["t0"], w + ".t0");
        piece.t1 = as_number(ps[i]["t1"], w + ".t1");
        piece.formula = parse_formula(as_string(ps[i]["formula"], w + ".formula"));
        piece.params = as_numbers(ps[i]["params"], w + ".params");
        if (piece.params.size() != formula_arity(piece.formula)) {
          config_fail(w + ".params", "formula '" + std::string(formula_name(piece.formula)) + "' expects " +
                                         std::to_string(formula_arity(piece.formula)) + " values");
        }
        s.modulation.pieces.push_back(std::move(piece));
      }
    } else {
      allow_keys(m, "modulation", {"builtin", "nu", "horizon", "value"});
      if (!m.contains("builtin")) config_fail("modulation", "missing 'builtin' or 'pieces'");
      s.modulation.builtin = as_string(m["builtin"], "modulation.builtin");
      bool known = false;
      for (const auto& n : builtin_names()) known = known || n == *s.modulation.builtin;
      if (!known) config_fail("modulation.builtin", "unknown builtin '" + *s.modulation.builtin + "'");
      if (m.contains("nu")) s.modulation.params.nu = as_number(m["nu"], "modulation.nu");
      if (m.contains("horizon")) s.modulation.params.horizon = as_number(m["horizon"], "modulation.horizon");
      if (m.contains("value")) s.modulation.params.value = as_number(m["value"], "modulation.value");
    }
  }

  if (doc.contains("weight")) {
    const auto& w = doc["weight"];
    allow_keys(w, "weight", {"s"});
    if (!w.contains("s")) config_fail("weight", "missing 's'");
    if (w["s"].is_string()) {
      if (w["s"].get<std::string>() != "unit") config_fail("weight.s", "expected a number or \"unit\"");
    } else {
      s.weight_s = as_number(w["s"], "weight.s");
      if (*s.weight_s < 0.0) config_fail("weight.s", "must be >= 0");
    }
  }

  if (doc.contains("solver")) {
    const auto& sv = doc["solver"];
    allow_keys(sv, "solver", {"dt", "n_points", "save_every", "scheme", "T"});
    if (sv.contains("dt")) {
      s.solver.dt = as_number(sv["dt"], "solver.dt");
      if (!(*s.solver.dt > 0.0)) config_fail("solver.dt", "must be positive");
    }
    if (sv.contains("n_points")) s.solver.n_points = as_count(sv["n_points"], "solver.n_points", 8);
    if (sv.contains("save_every")) s.solver.save_every = as_count(sv["save_every"], "solver.save_every", 1);
    if (sv.contains("scheme")) s.solver.scheme = parse_scheme(as_string(sv["scheme"], "solver.scheme"));
    if (sv.contains("T")) {
      s.solver.T = as_number(sv["T"], "solver.T");
      if (!(*s.solver.T > 0.0)) config_fail("solver.T", "must be positive");
    }
  }

  if (doc.contains("initial")) {
    const auto& ic = doc["initial"];
    allow_keys(ic, "initial", {"single_mode", "random_bandlimited", "tabulated"});
    if (ic.size() != 1) config_fail("initial", "exactly one of single_mode, random_bandlimited, tabulated");
    if (ic.contains("single_mode")) {
      s.initial.kind = InitialSpec::Kind::SingleMode;
      s.initial.mode = static_cast<int>(as_integer(ic["single_mode"], "initial.single_mode"));
    } else if (ic.contains("random_bandlimited")) {
      const auto& r = ic["random_bandlimited"];
      allow_keys(r, "initial.random_bandlimited", {"seed", "bandwidth"});
      s.initial.kind = InitialSpec::Kind::RandomBandlimited;
      if (r.contains("seed")) s.initial.seed = as_count(r["seed"], "initial.random_bandlimited.seed", 0);
      if (r.contains("bandwidth")) {
        s.initial.bandwidth = static_cast<int>(as_count(r["bandwidth"], "initial.random_bandlimited.bandwidth", 1));
      }
    } else {
      const auto& t = ic["tabulated"];
      allow_keys(t, "initial.tabulated", {"re", "im"});
      if (!t.contains("re")) config_fail("initial.tabulated", "missing 're'");
      s.initial.kind = InitialSpec::Kind::Tabulated;
      s.initial.re = as_numbers(t["re"], "initial.tabulated.re");
      if (t.contains("im")) s.initial.im = as_numbers(t["im"], "initial.tabulated.im");
    }
  }

  if (doc.contains("constants")) {
    const auto& c = doc["constants"];
    allow_keys(c, "constants", {"C", "C_sp", "beta", "ell", "C_xi", "C_xi_prime", "C_ed", "C_mix", "spectral_trials"});
    auto opt = [&](const char* key, std::optional<double>& dst) {
      if (c.contains(key)) dst = as_number(c[key], std::string("constants.") + key);
    };
    opt("C", s.constants.C);
    opt("C_sp", s.constants.C_sp);
    opt("beta", s.constants.beta);
    opt("ell", s.constants.ell);
    opt("C_xi", s.constants.C_xi);
    opt("C_xi_prime", s.constants.C_xi_prime);
    opt("C_ed", s.constants.C_ed);
    opt("C_mix", s.constants.C_mix);
    if (c.contains("spectral_trials")) {
      s.constants.spectral_trials = as_count(c["spectral_trials"], "constants.spectral_trials", 100);
    }
  }

  if (doc.contains("checks")) {
    s.checks = as_strings(doc["checks"], "checks");
    for (const auto& c : s.checks) {
      require_member_of(c, "checks", {"identities", "phi_decay", "psi_decay", "coercivity", "mixing_slope"});
    }
  }
  if (doc.contains("outputs")) {
    s.outputs = as_strings(doc["outputs"], "outputs");
    for (const auto& o : *s.outputs) {
      require_member_of(o, "outputs",
                        {"trajectory_csv", "energy_csv", "envelope_csv", "report_json", "figure2_csv",
                         "admissibility_json", "figure1_csv", "mixing_csv", "snapshots"});
    }
  }

  if (doc.contains("envelope")) {
    const auto& e = doc["envelope"];
    allow_keys(e, "envelope", {"kind", "samples", "spacing", "m", "prefactor"});
    if (e.contains("kind")) {
      s.envelope.kind = as_string(e["kind"], "envelope.kind");
      require_member_of(s.envelope.kind, "envelope.kind",
                        {"thm1", "class0", "thm2", "glued", "diffusion", "autonomous", "mixing"});
    }
    if (e.contains("samples")) s.envelope.samples = as_count(e["samples"], "envelope.samples", 2);
    if (e.contains("spacing")) {
      const auto sp = as_string(e["spacing"], "envelope.spacing");
      require_member_of(sp, "envelope.spacing", {"linear", "log"});
      s.envelope.log_spacing = sp == "log";
    }
    if (e.contains("m")) {
      s.envelope.m = static_cast<int>(as_integer(e["m"], "envelope.m"));
      if (*s.envelope.m != 1 && *s.envelope.m != 2) config_fail("envelope.m", "must be 1 or 2");
    }
    if (e.contains("prefactor")) {
      if (!e["prefactor"].is_boolean()) config_fail("envelope.prefactor", "expected a boolean");
      s.envelope.with_prefactor = e["prefactor"].get<bool>();
    }
  }

  if (doc.contains("mixing")) {
    const auto& m = doc["mixing"];
    allow_keys(m, "mixing", {"Xi_min", "Xi_max", "samples"});
    if (m.contains("Xi_min")) s.mixing.Xi_min = as_number(m["Xi_min"], "mixing.Xi_min");
    if (m.contains("Xi_max")) s.mixing.Xi_max = as_number(m["Xi_max"], "mixing.Xi_max");
    if (m.contains("samples")) s.mixing.samples = as_count(m["samples"], "mixing.samples", 2);
    if (!(s.mixing.Xi_min > 0.0 && s.mixing.Xi_max > s.mixing.Xi_min)) {
      config_fail("mixing", "need 0 < Xi_min < Xi_max");
    }
  }

  if (doc.contains("figure2")) {
    const auto& f = doc["figure2"];
    allow_keys(f, "figure2", {"C", "samples"});
    if (f.contains("C")) s.figure2.C = as_number(f["C"], "figure2.C");
    if (f.contains("samples")) s.figure2.samples = as_count(f["samples"], "figure2.samples", 2);
  }

  if (doc.contains("sweep")) {
    const auto& w = doc["sweep"];
    allow_keys(w, "sweep", {"command", "nu", "k"});
    if (w.contains("command")) {
      s.sweep.command = as_string(w["command"], "sweep.command");
      require_member_of(s.sweep.command, "sweep.command", {"simulate", "admissibility", "envelope", "mixing"});
    }
    if (w.contains("nu")) s.sweep.nu = as_numbers(w["nu"], "sweep.nu");
    if (w.contains("k")) {
      if (!w["k"].is_array()) config_fail("sweep.k", "expected an array of integers");
      for (std::size_t i = 0; i < w["k"].size(); ++i) {
        const auto k = as_integer(w["k"][i], "sweep.k[" + std::to_string(i) + "]");
        if (k == 0) config_fail("sweep.k", "entries must be nonzero");
        s.sweep.k.push_back(static_cast<int>(k));
      }
    }
  }
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

}  // namespace shearlab
