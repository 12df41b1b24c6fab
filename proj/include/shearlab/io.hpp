#pragma once

// Bit-stable CSV output, atomic file replacement and JSON serialisation of
// the diagnostic reports.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shearlab/energetics.hpp"
#include "shearlab/envelopes.hpp"
#include "shearlab/error.hpp"
#include "shearlab/modulation.hpp"

namespace shearlab {

using Json = nlohmann::json;

/// Shortest-form independent representation: 17 significant digits in
/// scientific notation, "nan"/"inf" spelled out.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Writes `content` to a temporary sibling and renames it over `path`, so
/// readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw Error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != columns.size()) throw DomainError("CsvTable: row width does not match header");
    rows.push_back(std::move(row));
  }

  /// Header row plus data rows, comma separated, Unix newlines.
  std::string body() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out += ',';
      out += columns[i];
    }
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += format_double(r[i]);
      }
      out += '\n';
    }
    return out;
  }
};

/// CSV document: one '#' comment line carrying the config hash and seed,
/// then the table body.
inline std::string csv_document(const CsvTable& table, const std::string& config_hash, std::uint64_t seed) {
  return "# config_hash=" + config_hash + " seed=" + std::to_string(seed) + "\n" + table.body();
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& table, const std::string& config_hash,
                      std::uint64_t seed) {
  atomic_write(path, csv_document(table, config_hash, seed));
}

inline void write_json(const std::filesystem::path& path, const Json& doc) {
  atomic_write(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Report serialisation

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const Violation& v) {
  return {{"condition", v.condition}, {"t", v.t}, {"value", finite_or_null(v.value)}, {"bound", finite_or_null(v.bound)}};
}

inline Json to_json(const std::vector<Violation>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

inline Json to_json(const AdmissibilityReport& r) {
  Json thm1 = {{"admissible", r.thm1.admissible},
               {"beta", r.thm1.beta},
               {"s", r.thm1.s ? Json(*r.thm1.s) : Json("unit")},
               {"ell", r.thm1.ell},
               {"C", r.thm1.C},
               {"t_star", finite_or_null(r.thm1.t_star)},
               {"t_star_is_infinite", std::isinf(r.thm1.t_star)},
               {"t_star_proof_variant", finite_or_null(r.thm1.t_star_proof_variant)},
               {"t_star_variants_differ", r.thm1.t_star != r.thm1.t_star_proof_variant},
               {"violations", to_json(r.thm1.violations)}};
  Json thm2 = {{"admissible", r.thm2.admissible},
               {"C_xi", r.thm2.C_xi},
               {"slope_bound", r.thm2.slope_bound},
               {"violations", to_json(r.thm2.violations)},
               {"proof_condition", r.thm2.proof_condition},
               {"proof_slope_bound", r.thm2.proof_slope_bound},
               {"proof_violations", to_json(r.thm2.proof_violations)}};
  Json per = Json::array();
  for (const auto& l : r.per_interval) {
    per.push_back({{"t0", l.t0}, {"t1", l.t1}, {"label", l.label}, {"thm1", l.thm1}, {"thm2", l.thm2}});
  }
  return {{"nu", r.nu}, {"k", r.k}, {"thm1", thm1}, {"thm2", thm2}, {"per_interval", per}};
}

inline Json to_json(const IdentityReport& r) {
  const char* names[] = {"E0", "E1", "E3", "E4"};
  Json res = Json::object();
  for (int q = 0; q < 4; ++q) res[names[q]] = r.max_residual[q];
  return {{"max_relative_residual", res}, {"points", r.points}, {"tolerance", r.tolerance},
          {"status", r.pass() ? "PASS" : "FAIL"}};
}

inline Json to_json(const DecayReport& r) {
  return {{"functional", r.functional},
          {"status", r.skipped ? "SKIPPED" : r.pass ? "PASS" : "FAIL"},
          {"supported", r.supported},
          {"diagnostic", r.diagnostic},
          {"max_normalized", finite_or_null(r.max_normalized)},
          {"max_excess", finite_or_null(r.max_excess)},
          {"t_at_max", r.t_at_max},
          {"threshold", r.threshold},
          {"rate_constant", r.rate_constant},
          {"points", r.points},
          {"coercivity_checks", r.coercivity_checks},
          {"coercivity_violations", r.coercivity_violations},
          {"min_realised_rate_ratio", finite_or_null(r.min_realised_ratio)}};
}

inline Json to_json(const Envelope& e) {
  Json c = Json::object();
  for (const auto& [k, v] : e.constants()) c[k] = finite_or_null(v);
  return {{"kind", std::string(envelope_kind_name(e.kind()))}, {"forced", e.forced()}, {"constants", c}};
}

}  // namespace shearlab
