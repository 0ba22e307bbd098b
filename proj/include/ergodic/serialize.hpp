#pragma once

// JSON (de)serialization for system specs and experiment reports, plus CSV
// formatting helpers. CSV numbers use '.' decimals and 17 significant digits
// so doubles survive a round trip.

#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergodic/equicontinuity.hpp"
#include "ergodic/measures.hpp"
#include "ergodic/systems.hpp"

namespace ergodic {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// CSV helpers.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) os << ',';
    os << cells[i];
  }
  os << '\n';
}

// ---------------------------------------------------------------------------
// Symbol sources and systems.
//
// Schema:
//   {"kind":"rotation","alpha":<double>}
//   {"kind":"doubling"}
//   {"kind":"shift","source":<source>}
//   {"kind":"product","left":<system>,"right":<system>}
// with sources
//   {"kind":"constant","symbol":0|1}
//   {"kind":"periodic","word":"01"}
//   {"kind":"sturmian","alpha":<double>,"x0":<double>}
//   {"kind":"blocks","base":<double>}
//   {"kind":"explicit","word":"0110","extension":"fill0"|"fill1"|"cycle"}
// ---------------------------------------------------------------------------

inline json source_to_json(const SymbolSource& src) {
  switch (src.kind()) {
    case SourceKind::Constant:
      return json{{"kind", "constant"}, {"symbol", src.constant_symbol()}};
    case SourceKind::Periodic:
      return json{{"kind", "periodic"}, {"word", src.word()}};
    case SourceKind::Sturmian:
      return json{{"kind", "sturmian"}, {"alpha", src.alpha()}, {"x0", src.x0()}};
    case SourceKind::BlockSequence:
      return json{{"kind", "blocks"}, {"base", src.growth_base()}};
    case SourceKind::Explicit: {
      const char* ext = src.extension() == WordExtension::FillZero  ? "fill0"
                        : src.extension() == WordExtension::FillOne ? "fill1"
                                                                    : "cycle";
      return json{{"kind", "explicit"}, {"word", src.word()}, {"extension", ext}};
    }
  }
  throw std::logic_error("source_to_json: unreachable");
}

inline SymbolSource source_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw std::invalid_argument("symbol source: expected an object with a \"kind\" string");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "constant") return SymbolSource::constant(j.at("symbol").get<int>());
  if (kind == "periodic") return SymbolSource::periodic(j.at("word").get<std::string>());
  if (kind == "sturmian")
    return SymbolSource::sturmian(j.at("alpha").get<double>(), j.at("x0").get<double>());
  if (kind == "blocks") return SymbolSource::block_sequence(j.at("base").get<double>());
  if (kind == "explicit") {
    const std::string ext = j.at("extension").get<std::string>();
    WordExtension we;
    if (ext == "fill0") {
      we = WordExtension::FillZero;
    } else if (ext == "fill1") {
      we = WordExtension::FillOne;
    } else if (ext == "cycle") {
      we = WordExtension::Cycle;
    } else {
      throw std::invalid_argument("symbol source: unknown extension \"" + ext + "\"");
    }
    return SymbolSource::explicit_word(j.at("word").get<std::string>(), we);
  }
  throw std::invalid_argument("symbol source: unknown kind \"" + kind + "\"");
}

inline json system_to_json(const SystemSpec& sys) {
  switch (sys.kind()) {
    case SystemKind::CircleRotation:
      return json{{"kind", "rotation"}, {"alpha", sys.alpha()}};
    case SystemKind::DoublingMap:
      return json{{"kind", "doubling"}};
    case SystemKind::BinaryShift:
      return json{{"kind", "shift"}, {"source", source_to_json(sys.source())}};
    case SystemKind::ProductSystem:
      return json{{"kind", "product"},
                  {"left", system_to_json(sys.left())},
                  {"right", system_to_json(sys.right())}};
  }
  throw std::logic_error("system_to_json: unreachable");
}

inline SystemSpec system_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw std::invalid_argument("system: expected an object with a \"kind\" string");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "rotation") return SystemSpec::rotation(j.at("alpha").get<double>());
  if (kind == "doubling") return SystemSpec::doubling();
  if (kind == "shift") return SystemSpec::shift(source_from_json(j.at("source")));
  if (kind == "product")
    return SystemSpec::product(system_from_json(j.at("left")), system_from_json(j.at("right")));
  throw std::invalid_argument("system: unknown kind \"" + kind + "\"");
}

// ---------------------------------------------------------------------------
// Point and measure summaries.
// ---------------------------------------------------------------------------

// Human-readable point label for CSV atom dumps.
inline std::string point_label(const SystemSpec& sys, const PointRef& p) {
  switch (sys.kind()) {
    case SystemKind::CircleRotation:
    case SystemKind::DoublingMap:
      return format_double(point_value(sys, p));
    case SystemKind::BinaryShift: {
      const auto& s = p.as_shift();
      std::string head;
      for (int i = 0; i < 16; ++i) head.push_back(static_cast<char>('0' + s.source.symbol(s.offset + i)));
      return "offset" + std::to_string(s.offset) + ":" + head;
    }
    case SystemKind::ProductSystem: {
      const auto& pr = p.as_product();
      return "(" + point_label(sys.left(), *pr.left) + "|" + point_label(sys.right(), *pr.right) + ")";
    }
  }
  throw std::logic_error("point_label: unreachable");
}

inline json measure_summary_json(const EmpiricalMeasure& mu, const TestFamily& family,
                                 int integral_count = 4) {
  const std::vector<double> ints = family_integrals(mu, family);
  json sel = json::array();
  for (int j = 0; j < integral_count && j < static_cast<int>(ints.size()); ++j)
    sel.push_back(ints[static_cast<std::size_t>(j)]);
  return json{{"scheme", scheme_name(mu.scheme())},
              {"window", {mu.window_begin(), mu.window_end()}},
              {"atom_count", mu.support_size()},
              {"selected_integrals", sel}};
}

// Full atom dump: columns (k, point, weight); k is the 1-based orbit index.
inline void measure_atoms_csv(std::ostream& os, const EmpiricalMeasure& mu,
                              std::optional<int> rep_index = std::nullopt) {
  std::uint64_t k = mu.window_begin();
  mu.for_each_atom([&](const PointRef& p, double w) {
    ++k;
    std::vector<std::string> row;
    if (rep_index) row.push_back(std::to_string(*rep_index));
    row.push_back(std::to_string(k));
    row.push_back(point_label(mu.system(), p));
    row.push_back(format_double(w));
    write_csv_row(os, row);
  });
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

inline json modulus_to_json(const ModulusProfile& p) {
  json rows = json::array();
  for (std::size_t i = 0; i < p.eps_grid.size(); ++i) {
    json row{{"eps", p.eps_grid[i]}};
    if (p.delta_of_eps[i]) {
      row["delta"] = *p.delta_of_eps[i];
    } else {
      row["delta"] = nullptr;
    }
    rows.push_back(std::move(row));
  }
  return json{{"rows", std::move(rows)},
              {"scheme", scheme_name(p.scheme)},
              {"n_eval", p.n_eval},
              {"samples_per_delta", p.sample_count},
              {"complete", p.complete()},
              {"sampler_exhausted", p.sampler_exhausted}};
}

inline json sensitivity_to_json(const SensitivityReport& r) {
  return json{{"eps_estimate", r.eps_estimate}, {"pair_count", r.pair_count},
              {"horizon", r.horizon},           {"scheme", scheme_name(r.scheme)},
              {"quantile", r.quantile_used},    {"degenerate", r.degenerate}};
}

inline json dichotomy_to_json(const DichotomyVerdict& v) {
  return json{{"verdict", verdict_name(v.verdict)},
              {"modulus", modulus_to_json(v.modulus)},
              {"sensitivity", sensitivity_to_json(v.sensitivity)}};
}

inline json unique_ergodicity_to_json(const UniqueErgodicityReport& r) {
  return json{{"verdict", r.verdict == ErgodicityVerdict::UniquelyErgodicConsistent
                              ? "UniquelyErgodicConsistent"
                              : "Inconsistent"},
              {"max_pairwise_rho", r.max_pairwise_rho},
              {"start_count", r.start_count},
              {"horizon", r.horizon},
              {"scheme", scheme_name(r.scheme)},
              {"tolerance", r.tolerance}};
}

inline json oxtoby_to_json(const OxtobyReport& r) {
  return json{{"avg_at_zero", r.avg_at_zero},
              {"m_of_U_estimate", r.m_of_u_estimate},
              {"gap", r.gap},
              {"alpha", r.alpha},
              {"n", r.n},
              {"mc_samples", r.mc_samples}};
}

}  // namespace ergodic
