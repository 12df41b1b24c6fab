#pragma once

// Scenario pipelines behind the command-line tool. Each run writes its
// artifacts under one output directory and returns an exit code:
// 0 all requested checks pass, 1 configuration error, 2 check failure,
// 3 non-finite values.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "shearlab/energetics.hpp"
#include "shearlab/envelopes.hpp"
#include "shearlab/error.hpp"
#include "shearlab/io.hpp"
#include "shearlab/modulation.hpp"
#include "shearlab/scenario.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/solver.hpp"

namespace shearlab {

enum ExitCode : int { kExitPass = 0, kExitConfig = 1, kExitCheckFailed = 2, kExitNumerical = 3 };

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> checks;
  bool force = false;
};

struct RunResult {
  int exit_code = kExitPass;
  Json report;
};

struct ResolvedConstants {
  double c_inf = 0.0;
  double sup_dv = 0.0;
  double C_sp = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double ell = 4.0;
  double C_xi = std::numeric_limits<double>::quiet_NaN();
  double C_xi_prime = std::numeric_limits<double>::quiet_NaN();
  double A = std::numeric_limits<double>::quiet_NaN();
  double C_ed = 1.0;
  double C_mix = 1.0;
  bool profile_simple = false;
  Json provenance = Json::object();

  Json to_json() const {
    Json j = {{"c_inf", c_inf},
              {"sup_dv", sup_dv},
              {"C_sp", finite_or_null(C_sp)},
              {"C", finite_or_null(C)},
              {"beta", finite_or_null(beta)},
              {"ell", ell},
              {"C_xi", finite_or_null(C_xi)},
              {"C_xi_prime", finite_or_null(C_xi_prime)},
              {"A", finite_or_null(A)},
              {"C_ed", C_ed},
              {"C_mix", C_mix},
              {"profile_simple", profile_simple},
              {"source", provenance}};
    return j;
  }
};

inline ResolvedConstants resolve_constants(const Scenario& sc, const ShearProfile& profile, const Modulation& m,
                                           std::uint64_t seed) {
  ResolvedConstants r;
  const auto& c = sc.constants;
  auto mark = [&](const char* key, bool configured) { r.provenance[key] = configured ? "configured" : "derived"; };
  r.c_inf = profile.c_inf();
  r.sup_dv = profile.sup_dv();
  r.profile_simple = profile.simple();
  if (c.C_sp) {
    r.C_sp = *c.C_sp;
  } else if (r.profile_simple) {
    SpectralGapOptions opt;
    opt.seed = seed;
    r.C_sp = estimate_spectral_gap_constant(profile, default_sigma_grid(), c.spectral_trials, opt);
  }
  mark("C_sp", c.C_sp.has_value());
  r.C = c.C.value_or(default_functional_constant(r.c_inf, r.C_sp));
  mark("C", c.C.has_value());
  r.beta = c.beta.value_or(default_beta(m.min_xi(), r.C, sc.nu, sc.k));
  if (!c.beta && !std::isfinite(r.C)) r.beta = std::numeric_limits<double>::quiet_NaN();
  mark("beta", c.beta.has_value());
  r.ell = c.ell.value_or(4.0);
  mark("ell", c.ell.has_value());
  r.C_xi = c.C_xi.value_or(default_C_xi(r.c_inf, r.C_sp));
  mark("C_xi", c.C_xi.has_value());
  if (c.C_xi_prime) {
    r.C_xi_prime = *c.C_xi_prime;
  } else if (std::isfinite(r.C_xi) && r.C_xi > 0.0 && r.C_xi <= 1.0 && std::isfinite(r.C_sp)) {
    const auto p = Thm2Params::derived(sc.nu, sc.k, r.C_xi, r.c_inf, r.C_sp);
    r.C_xi_prime = p.C_xi_prime;
    r.A = p.A;
  }
  mark("C_xi_prime", c.C_xi_prime.has_value());
  r.C_ed = c.C_ed.value_or(1.0);
  mark("C_ed", c.C_ed.has_value());
  r.C_mix = c.C_mix.value_or(1.0);
  mark("C_mix", c.C_mix.has_value());
  return r;
}

namespace detail {

inline std::uint64_t effective_seed(const Scenario& sc, const RunOptions& opt) { return opt.seed.value_or(sc.seed); }

inline std::vector<std::string> effective_checks(const Scenario& sc, const RunOptions& opt) {
  return opt.checks.value_or(sc.checks);
}

inline std::string config_hash(const Scenario& sc, const RunOptions& opt) {
  Json j = sc.source;
  j["seed"] = effective_seed(sc, opt);
  if (opt.checks) j["checks"] = *opt.checks;
  j["force"] = opt.force;
  return hex64(fnv1a64(j.dump()));
}

inline bool has(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

inline Json header(const Scenario& sc, const RunOptions& opt, const std::string& command) {
  return {{"scenario", sc.name},
          {"command", command},
          {"config_hash", config_hash(sc, opt)},
          {"seed", effective_seed(sc, opt)},
          {"force", opt.force},
          {"nu", sc.nu},
          {"k", sc.k}};
}

inline std::vector<double> sample_times(double T, std::size_t n, bool log_spacing) {
  std::vector<double> t;
  t.reserve(n + 1);
  if (!log_spacing) {
    for (std::size_t i = 0; i < n; ++i) t.push_back(i + 1 == n ? T : T * static_cast<double>(i) / (n - 1));
    return t;
  }
  // t = 0 followed by n - 1 log-spaced points ending at T, starting at
  // min(1, T) / 100.
  t.push_back(0.0);
  const double lo = std::log10(std::min(1.0, T) * 1e-2), hi = std::log10(T);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double e = n > 2 ? lo + (hi - lo) * static_cast<double>(i) / (n - 2) : hi;
    t.push_back(i + 2 == n ? T : std::pow(10.0, e));
  }
  return t;
}

// Time at which Xi reaches `target`, by bisection.
inline double time_for_Xi(const Modulation& m, double target) {
  double lo = 0.0, hi = m.horizon();
  if (m.Xi(hi) < target) throw ConfigError("mixing: Xi(T) is below the requested Xi range");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (m.Xi(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct CheckTally {
  Json checks = Json::object();
  bool failed = false;

  // Unsupported checks are reported but only gate the exit code under --force.
  void add(const std::string& name, Json entry, bool pass, bool supported, bool force) {
    if (!supported && !force) {
      entry["status"] = pass ? "UNSUPPORTED_PASS" : "UNSUPPORTED_FAIL";
    } else if (!pass) {
      failed = true;
    }
    checks[name] = std::move(entry);
  }
};

}  // namespace detail

inline RunResult run_simulate(const Scenario& sc, const RunOptions& opt) {
  const auto seed = detail::effective_seed(sc, opt);
  const auto checks = detail::effective_checks(sc, opt);
  const auto hash = detail::config_hash(sc, opt);
  const auto profile = sc.profile.build();
  const auto m = sc.modulation.build(sc.nu);
  const auto w = sc.weights();
  const double T = sc.solver.T.value_or(m.horizon());

  SolverConfig cfg;
  cfg.nu = sc.nu;
  cfg.k = sc.k;
  cfg.dt = sc.solver.dt.value_or(default_time_step(sc.nu, sc.k, profile, m));
  cfg.n_points = sc.solver.n_points;
  cfg.save_every = sc.solver.save_every;
  cfg.scheme = sc.solver.scheme;
  const PeriodicGrid grid(cfg.n_points);
  const auto theta0 = sc.initial.build(grid, sc.k, seed);
  const auto consts = resolve_constants(sc, profile, m, seed);

  const auto traj = simulate(theta0, T, cfg, profile, m);
  const auto sp = profile.sample(grid);

  std::optional<Thm1Params> p1;
  std::string p1_diag;
  if (sc.nu > 0.0) {
    try {
      p1 = Thm1Params::make(sc.nu, sc.k, consts.beta, consts.ell, consts.C);
    } catch (const DomainError& e) {
      p1_diag = e.what();
    }
  } else {
    p1_diag = "nu = 0";
  }
  std::optional<Thm2Params> p2;
  if (sc.nu > 0.0 && std::isfinite(consts.C_xi_prime) && consts.C_xi > 0.0 && consts.C_xi <= 1.0) {
    p2 = Thm2Params::with_rate(sc.nu, sc.k, consts.C_xi, consts.C_xi_prime);
    p2->A = consts.A;
  }

  CsvTable energy{{"t", "E0", "E1", "E2", "E3", "E4", "Phi", "Psi"}, {}};
  CsvTable trajectory{{"t", "E0_physical", "L2_physical", "Hminus1_physical", "H1_physical"}, {}};
  std::size_t coercivity_checks = 0, coercivity_violations = 0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    const auto s = energies(traj.thetas[i], sp, t);
    double ph = nan, ps = nan;
    if (p1) {
      const auto c = phi_coercivity(s, *p1, w);
      ph = c.value;
      ++coercivity_checks;
      if (!c.holds()) ++coercivity_violations;
    }
    if (p2) {
      const auto c = psi_coercivity(s, *p2, m.xi(t));
      ps = c.value;
      ++coercivity_checks;
      if (!c.holds()) ++coercivity_violations;
    }
    energy.add({t, s.E0, s.E1, s.E2, s.E3, s.E4, ph, ps});
    if (sc.wants("trajectory_csv")) {
      const auto phys = traj.physical(i);
      trajectory.add({t, l2_norm_squared(phys), sobolev_norm(phys, 0), sobolev_norm(phys, -1), sobolev_norm(phys, 1)});
    }
  }

  RunResult res;
  res.report = detail::header(sc, opt, "simulate");
  res.report["solver"] = {{"dt", cfg.dt},
                          {"n_points", cfg.n_points},
                          {"save_every", cfg.save_every},
                          {"scheme", std::string(scheme_name(cfg.scheme))},
                          {"T", T},
                          {"snapshots", traj.size()}};
  res.report["constants"] = consts.to_json();
  const auto adm = classify(m, sc.nu, sc.k, w, consts.beta, consts.ell, consts.C, consts.C_xi);
  res.report["admissibility"] = to_json(adm);

  detail::CheckTally tally;
  for (const auto& name : checks) {
    if (name == "identities") {
      const auto r = check_energy_identities(traj, profile, m);
      tally.add(name, to_json(r), r.pass(), true, opt.force);
    } else if (name == "phi_decay") {
      if (!p1) {
        tally.checks[name] = {{"status", "SKIPPED"}, {"diagnostic", "parameters unavailable: " + p1_diag}};
        continue;
      }
      const auto r = check_phi_decay(traj, *p1, w, m, profile);
      tally.add(name, to_json(r), r.pass, r.supported || r.skipped, opt.force);
    } else if (name == "psi_decay") {
      if (!p2) {
        tally.checks[name] = {{"status", "SKIPPED"}, {"diagnostic", "parameters unavailable"}};
        continue;
      }
      const auto r = check_psi_decay(traj, *p2, m, profile);
      tally.add(name, to_json(r), r.pass, r.supported || r.skipped, opt.force);
    } else if (name == "coercivity") {
      const bool pass = coercivity_violations == 0;
      tally.add(name,
                {{"status", pass ? "PASS" : "FAIL"}, {"checks", coercivity_checks}, {"violations", coercivity_violations}},
                pass, true, opt.force);
    } else {
      throw ConfigError("check '" + name + "' is not available for simulate");
    }
  }
  res.report["checks"] = tally.checks;
  res.report["status"] = tally.failed ? "FAIL" : "PASS";
  res.exit_code = tally.failed ? kExitCheckFailed : kExitPass;

  const auto& out = opt.out_dir;
  if (sc.wants("energy_csv")) write_csv(out / "energy.csv", energy, hash, seed);
  if (sc.wants("trajectory_csv")) write_csv(out / "trajectory.csv", trajectory, hash, seed);
  if (sc.wants("snapshots")) {
    std::ostringstream os(std::ios::binary);
    for (std::size_t i = 0; i < traj.size(); ++i) write_snapshot(os, traj.thetas[i], traj.times[i]);
    atomic_write(out / "snapshots.bin", os.str());
  }
  if (sc.wants("report_json")) write_json(out / "report.json", res.report);
  return res;
}

inline RunResult run_admissibility(const Scenario& sc, const RunOptions& opt) {
  const auto seed = detail::effective_seed(sc, opt);
  const auto profile = sc.profile.build();
  const auto m = sc.modulation.build(sc.nu);
  const auto w = sc.weights();
  const auto consts = resolve_constants(sc, profile, m, seed);
  const auto adm = classify(m, sc.nu, sc.k, w, consts.beta, consts.ell, consts.C, consts.C_xi);

  RunResult res;
  res.report = detail::header(sc, opt, "admissibility");
  res.report["modulation"] = m.name();
  res.report["constants"] = consts.to_json();
  res.report["admissibility"] = to_json(adm);
  res.exit_code = kExitPass;

  if (sc.wants("figure1_csv") && sc.nu > 0.0) {
    Thm1Bounds b{sc.nu, sc.k, w, consts.beta, consts.ell, consts.C};
    CsvTable fig{{"t", "xi", "L", "U"}, {}};
    for (const auto& row : figure1_samples(m, b, 1000)) fig.add({row.t, row.xi, row.lower, row.upper});
    write_csv(opt.out_dir / "figure1.csv", fig, detail::config_hash(sc, opt), seed);
  }
  if (sc.wants("admissibility_json") || sc.wants("report_json")) {
    write_json(opt.out_dir / "admissibility.json", res.report);
  }
  return res;
}

/// Builds the envelope requested by the scenario. Throws UnsupportedError
/// when hypotheses fail and force is off.
inline Envelope build_envelope(const Scenario& sc, const ShearProfile& profile, std::shared_ptr<const Modulation> m,
                               const ResolvedConstants& c, bool force) {
  const auto& kind = sc.envelope.kind;
  EnvelopeOptions eo{force, sc.envelope.with_prefactor};
  if (kind == "diffusion") return diffusion_envelope(sc.nu, sc.k);
  if (kind == "autonomous") {
    const int mo = sc.envelope.m.value_or(std::clamp(profile.max_order(), 1, 2));
    return autonomous_envelope(sc.nu, sc.k, mo, c.C_ed);
  }
  if (kind == "mixing") return mixing_envelope(sc.k, m, c.C_mix);
  if (!(sc.nu > 0.0)) throw ConfigError("envelope '" + kind + "' requires nu > 0");
  if (kind == "thm1" || kind == "class0") {
    const auto p = Thm1Params::make(sc.nu, sc.k, c.beta, c.ell, c.C);
    const auto w = kind == "class0" ? WeightFamily::unit() : sc.weights();
    return thm1_envelope(p, w, m, c.C_ed, eo);
  }
  if (kind == "thm2") return thm2_envelope(sc.nu, sc.k, c.C_xi, c.C_xi_prime, m, c.C_ed, eo);
  // glued: label each piece and build its envelope in local time.
  const auto w = sc.weights();
  const auto adm = classify(*m, sc.nu, sc.k, w, c.beta, c.ell, c.C, c.C_xi);
  std::vector<GluePiece> pieces;
  for (std::size_t i = 0; i < adm.per_interval.size(); ++i) {
    const auto& lab = adm.per_interval[i];
    const auto local = local_piece(*m, i);
    if (lab.label == "off") {
      pieces.push_back({lab.t0, lab.t1, diffusion_envelope(sc.nu, sc.k)});
    } else if (lab.label == "thm1") {
      const auto p = Thm1Params::make(sc.nu, sc.k, c.beta, c.ell, c.C);
      pieces.push_back({lab.t0, lab.t1, thm1_envelope(p, w, local, c.C_ed, eo)});
    } else if (lab.label == "thm2" || force) {
      pieces.push_back({lab.t0, lab.t1, thm2_envelope(sc.nu, sc.k, c.C_xi, c.C_xi_prime, local, c.C_ed, eo)});
    } else {
      throw UnsupportedError("glue: interval [" + std::to_string(lab.t0) + ", " + std::to_string(lab.t1) +
                             ") satisfies neither theorem; use force to override");
    }
  }
  return glue(pieces);
}

inline RunResult run_envelope(const Scenario& sc, const RunOptions& opt) {
  const auto seed = detail::effective_seed(sc, opt);
  const auto hash = detail::config_hash(sc, opt);
  const auto profile = sc.profile.build();
  const auto m = std::make_shared<const Modulation>(sc.modulation.build(sc.nu));
  const auto consts = resolve_constants(sc, profile, *m, seed);
  const double T = sc.solver.T.value_or(m->horizon());

  RunResult res;
  res.report = detail::header(sc, opt, "envelope");
  res.report["constants"] = consts.to_json();
  const auto adm = classify(*m, sc.nu, sc.k, sc.weights(), consts.beta, consts.ell, consts.C, consts.C_xi);
  const auto adm_json = to_json(adm);
  res.report["admissibility_hash"] = hex64(fnv1a64(adm_json.dump()));
  try {
    const auto env = build_envelope(sc, profile, m, consts, opt.force);
    CsvTable table{{"t", "envelope_value", "exponent"}, {}};
    for (double t : detail::sample_times(T, sc.envelope.samples, sc.envelope.log_spacing)) {
      table.add({t, env(t), env.exponent(t)});
    }
    res.report["envelope"] = to_json(env);
    res.report["status"] = "PASS";
    res.exit_code = kExitPass;
    if (sc.wants("envelope_csv")) write_csv(opt.out_dir / "envelope.csv", table, hash, seed);
  } catch (const UnsupportedError& e) {
    res.report["status"] = "UNSUPPORTED";
    res.report["diagnostic"] = e.what();
    res.exit_code = kExitCheckFailed;
  }
  if (sc.wants("report_json")) write_json(opt.out_dir / "envelope.json", res.report);
  return res;
}

inline RunResult run_mixing(const Scenario& sc, const RunOptions& opt) {
  const auto seed = detail::effective_seed(sc, opt);
  const auto hash = detail::config_hash(sc, opt);
  const auto checks = detail::effective_checks(sc, opt);
  const auto profile = sc.profile.build();
  const auto m = std::make_shared<const Modulation>(sc.modulation.build(sc.nu));
  const PeriodicGrid grid(sc.solver.n_points);
  const auto theta0 = sc.initial.build(grid, sc.k, seed);
  const double h1 = sobolev_norm(theta0, 1);

  std::vector<double> ts, Xis, ratios;
  const std::size_t n = sc.mixing.samples;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log10(sc.mixing.Xi_min) +
                     (std::log10(sc.mixing.Xi_max) - std::log10(sc.mixing.Xi_min)) * static_cast<double>(i) / (n - 1);
    const double t = detail::time_for_Xi(*m, std::pow(10.0, e));
    const auto theta = exact_inviscid(theta0, t, profile, *m);
    ts.push_back(t);
    Xis.push_back(m->Xi(t));
    ratios.push_back(sobolev_norm(theta, -1) / h1);
  }
  const auto fit = fit_mixing_constant(Xis, ratios, sc.k);
  const auto env = mixing_envelope(sc.k, m, fit.C_sup);
  CsvTable table{{"t", "Xi", "ratio", "envelope"}, {}};
  for (std::size_t i = 0; i < n; ++i) table.add({ts[i], Xis[i], ratios[i], env(ts[i])});

  RunResult res;
  res.report = detail::header(sc, opt, "mixing");
  res.report["mixing"] = {{"slope", fit.slope},
                          {"C_sup", fit.C_sup},
                          {"C_least_squares", fit.C_ls},
                          {"dominates", fit.dominates},
                          {"n_points", grid.size()},
                          {"Xi_min", sc.mixing.Xi_min},
                          {"Xi_max", sc.mixing.Xi_max}};
  detail::CheckTally tally;
  for (const auto& name : checks) {
    if (name != "mixing_slope") throw ConfigError("check '" + name + "' is not available for mixing");
    const bool pass = std::abs(fit.slope + 0.5) <= 0.1 && fit.dominates;
    tally.add(name, {{"status", pass ? "PASS" : "FAIL"}, {"slope", fit.slope}, {"dominates", fit.dominates}}, pass,
              true, opt.force);
  }
  res.report["checks"] = tally.checks;
  res.report["status"] = tally.failed ? "FAIL" : "PASS";
  res.exit_code = tally.failed ? kExitCheckFailed : kExitPass;
  if (sc.wants("mixing_csv")) write_csv(opt.out_dir / "mixing.csv", table, hash, seed);
  if (sc.wants("report_json")) write_json(opt.out_dir / "mixing.json", res.report);
  return res;
}

struct Figure2Data {
  CsvTable table;
  double exponent_exact = 0.0;       // C (nu |k|)^{1/2} int_0^{1/nu} xi_B^3, closed form
  double exponent_quadrature = 0.0;  // same, adaptive quadrature
  double exponent_simplified = 0.0;  // C (1/(4 nu^{1/2}) - 3/2)
  double exponent_unsimplified = 0.0;
  double diffusion_exponent = 0.0;   // 2 nu (k^2 + 1) / nu
  std::optional<double> t_cross;     // first sample after which the ordering B <= xi1 <= diffusion holds
  std::vector<std::string> final_ordering;
};

/// Envelope-only comparison of example B, xi = 1 and pure diffusion over
/// [0, 1/nu] with unit prefactors.
inline Figure2Data figure2_data(double nu, int k, double C, std::size_t samples) {
  if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("figure2: need 0 < nu < 1");
  const auto m = builtin("example_B", {nu, std::nullopt, std::nullopt});
  const double ak = std::abs(static_cast<double>(k));
  const double k2 = ak * ak;
  const double rate = C * std::sqrt(nu * ak);
  const double T = m.horizon();
  Figure2Data d;
  d.table.columns = {"t", "env_exampleB", "env_xi1", "env_diffusion", "log_env_exampleB", "log_env_xi1",
                     "log_env_diffusion"};
  std::vector<double> lb, l1, ld, ts;
  for (double t : detail::sample_times(T, samples, true)) {
    const double b = -rate * m.power_integral(3.0, 0.0, t) - 2 * nu * k2 * t;
    const double x1 = -rate * t - 2 * nu * k2 * t;
    const double df = -2 * nu * (k2 + 1) * t;
    d.table.add({t, std::exp(b), std::exp(x1), std::exp(df), b, x1, df});
    ts.push_back(t);
    lb.push_back(b);
    l1.push_back(x1);
    ld.push_back(df);
  }
  d.exponent_exact = rate * m.power_integral(3.0, 0.0, T);
  d.exponent_quadrature = rate * m.integrate([](double x, double) { return x * x * x; }, 0.0, T);
  d.exponent_simplified = example_B_exponent_literal(nu, C) * std::sqrt(ak);
  d.exponent_unsimplified = example_B_exponent_unsimplified(nu, C) * std::sqrt(ak);
  d.diffusion_exponent = 2 * nu * (k2 + 1) * T;
  const double tol = 1e-12;
  for (std::size_t i = ts.size(); i-- > 0;) {
    const bool ok = lb[i] <= l1[i] + tol * std::abs(l1[i]) && l1[i] <= ld[i] + tol * std::abs(ld[i]);
    if (!ok) break;
    d.t_cross = ts[i];
  }
  std::vector<std::pair<double, std::string>> last{{lb.back(), "env_exampleB"}, {l1.back(), "env_xi1"},
                                                   {ld.back(), "env_diffusion"}};
  std::sort(last.begin(), last.end());
  for (const auto& [v, name] : last) d.final_ordering.push_back(name);
  return d;
}

inline RunResult run_figure2(const Scenario& sc, const RunOptions& opt) {
  const auto seed = detail::effective_seed(sc, opt);
  const auto d = figure2_data(sc.nu, sc.k, sc.figure2.C, sc.figure2.samples);
  const double rel_quad = std::abs(d.exponent_exact - d.exponent_quadrature) / std::abs(d.exponent_exact);
  const double rel_simpl = std::abs(d.exponent_exact - d.exponent_simplified) / std::abs(d.exponent_exact);
  const double rel_unsimpl = std::abs(d.exponent_exact - d.exponent_unsimplified) / std::abs(d.exponent_exact);
  const double ramp = std::pow(sc.nu, -0.5);

  RunResult res;
  res.report = detail::header(sc, opt, "figure2");
  Json ordering = Json::array();
  for (const auto& name : d.final_ordering) ordering.push_back(name);
  res.report["figure2"] = {
      {"C", sc.figure2.C},
      {"exponent_at_horizon", -d.exponent_exact},
      {"exponent_at_horizon_quadrature", -d.exponent_quadrature},
      {"closed_form_vs_quadrature_rel", rel_quad},
      {"simplified_bracket_exponent", -d.exponent_simplified},
      {"simplified_bracket_rel_discrepancy", rel_simpl},
      {"unsimplified_bracket_exponent", -d.exponent_unsimplified},
      {"unsimplified_bracket_rel_discrepancy", rel_unsimpl},
      {"diffusion_exponent_at_horizon", -d.diffusion_exponent},
      {"ordering_B_le_xi1_le_diffusion_from", d.t_cross ? Json(*d.t_cross) : Json(nullptr)},
      {"ordering_holds_before_10_ramp_times", d.t_cross.has_value() && *d.t_cross < 10 * ramp},
      {"ordering_at_horizon_ascending", ordering}};
  const bool pass = rel_quad <= 1e-10;
  res.report["status"] = pass ? "PASS" : "FAIL";
  res.exit_code = pass ? kExitPass : kExitCheckFailed;
  if (sc.wants("figure2_csv")) write_csv(opt.out_dir / "figure2.csv", d.table, detail::config_hash(sc, opt), seed);
  if (sc.wants("report_json")) write_json(opt.out_dir / "figure2.json", res.report);
  return res;
}

/// Maps library exceptions onto exit codes; the message goes to `err`.
template <class F>
int guarded(const F& f, std::string& err) {
  try {
    return f();
  } catch (const NumericalError& e) {
    err = e.what();
    return kExitNumerical;
  } catch (const UnsupportedError& e) {
    err = e.what();
    return kExitCheckFailed;
  } catch (const Error& e) {
    err = e.what();
    return kExitConfig;
  } catch (const Json::exception& e) {
    err = e.what();
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err = e.what();
    return kExitConfig;
  }
}

inline RunResult run_command(const std::string& command, const Scenario& sc, const RunOptions& opt) {
  if (command == "simulate") return run_simulate(sc, opt);
  if (command == "admissibility") return run_admissibility(sc, opt);
  if (command == "envelope") return run_envelope(sc, opt);
  if (command == "mixing") return run_mixing(sc, opt);
  if (command == "figure2") return run_figure2(sc, opt);
  throw ConfigError("unknown command '" + command + "'");
}

inline std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SHEARLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(v));
  }
  return n;
}

/// Cartesian sweep over nu and k; each combination runs in its own
/// subdirectory, in parallel up to thread_cap() workers.
inline RunResult run_sweep(const Scenario& sc, const RunOptions& opt) {
  const auto nus = sc.sweep.nu.empty() ? std::vector<double>{sc.nu} : sc.sweep.nu;
  const auto ks = sc.sweep.k.empty() ? std::vector<int>{sc.k} : sc.sweep.k;
  struct Job {
    double nu;
    int k;
    std::string dir;
    int code = 0;
    std::string error;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < nus.size(); ++i) {
    for (int k : ks) jobs.push_back({nus[i], k, "nu" + std::to_string(i) + "_k" + std::to_string(k), 0, {}});
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      auto& job = jobs[j];
      Scenario s = sc;
      s.nu = job.nu;
      s.k = job.k;
      s.modulation.params.nu.reset();
      s.source["nu"] = job.nu;
      s.source["k"] = job.k;
      RunOptions o = opt;
      o.out_dir = opt.out_dir / job.dir;
      job.code = guarded([&] { return run_command(sc.sweep.command, s, o).exit_code; }, job.error);
    }
  };
  const std::size_t n_threads = std::min(thread_cap(), std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i + 1 < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RunResult res;
  res.report = detail::header(sc, opt, "sweep");
  CsvTable table{{"nu", "k", "exit_code"}, {}};
  Json runs = Json::array();
  int code = kExitPass;
  for (const auto& job : jobs) {
    table.add({job.nu, static_cast<double>(job.k), static_cast<double>(job.code)});
    runs.push_back({{"nu", job.nu}, {"k", job.k}, {"dir", job.dir}, {"exit_code", job.code}, {"error", job.error}});
    code = std::max(code, job.code);
  }
  res.report["runs"] = runs;
  res.exit_code = code;
  write_csv(opt.out_dir / "sweep.csv", table, detail::config_hash(sc, opt), detail::effective_seed(sc, opt));
  write_json(opt.out_dir / "sweep.json", res.report);
  return res;
}

}  // namespace shearlab
