// Reproducible experiment runner for the ergodic averaging library.
//
// Subcommands: average, vset, defect, modulus, sensitivity, dichotomy,
// unique-ergodicity, oxtoby, sarnak, report. Each writes optional JSON/CSV
// artifacts and prints a one-line summary. Exit codes: 0 success, 2 invalid
// configuration, 1 internal error.
//
// Option precedence: command-line flags > --config JSON file > ERGODIC_SEED
// environment variable (seed only) > built-in defaults. JSON outputs embed
// the fully resolved configuration for provenance.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ergodic/equicontinuity.hpp"
#include "ergodic/measures.hpp"
#include "ergodic/mobius.hpp"
#include "ergodic/serialize.hpp"
#include "ergodic/systems.hpp"

namespace {

using ergodic::json;

constexpr const char* kVersion = "0.1.0";

// Exception carrying an "invalid configuration" diagnosis (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double named_alpha(const std::string& token) {
  if (token == "phi") return (std::sqrt(5.0) - 1.0) / 2.0;
  if (token == "sqrt2") return std::sqrt(2.0) - 1.0;
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("unknown alpha shortcut \"" + token + "\" (use phi, sqrt2, or a number)");
  }
}

// --system accepts a shorthand token or an inline JSON object:
//   rotation:phi | rotation:0.25 | doubling | shift:const0 | shift:const1 |
//   shift:blocks | shift:sturmian | shift:periodic:<word> | {...json...}
ergodic::SystemSpec parse_system(const std::string& text) {
  if (text.empty()) throw ConfigError("missing --system");
  if (text.front() == '{') {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("malformed --system JSON");
    try {
      return ergodic::system_from_json(j);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  const std::string& kind = parts[0];
  if (kind == "rotation") {
    if (parts.size() != 2) throw ConfigError("rotation needs an angle: rotation:<alpha|phi|sqrt2>");
    return ergodic::SystemSpec::rotation(named_alpha(parts[1]));
  }
  if (kind == "doubling") {
    if (parts.size() != 1) throw ConfigError("doubling takes no parameters");
    return ergodic::SystemSpec::doubling();
  }
  if (kind == "shift") {
    if (parts.size() < 2) throw ConfigError("shift needs a source: shift:<const0|const1|blocks|sturmian|periodic:WORD>");
    const std::string& src = parts[1];
    if (src == "const0") return ergodic::SystemSpec::shift(ergodic::SymbolSource::constant(0));
    if (src == "const1") return ergodic::SystemSpec::shift(ergodic::SymbolSource::constant(1));
    if (src == "blocks") {
      const double base = parts.size() > 2 ? named_alpha(parts[2]) : 2.0;
      return ergodic::SystemSpec::shift(ergodic::SymbolSource::block_sequence(base));
    }
    if (src == "sturmian") {
      const double a = parts.size() > 2 ? named_alpha(parts[2]) : 2.0 - (std::sqrt(5.0) + 1.0) / 2.0;
      const double x0 = parts.size() > 3 ? named_alpha(parts[3]) : a;
      return ergodic::SystemSpec::shift(ergodic::SymbolSource::sturmian(a, x0));
    }
    if (src == "periodic") {
      if (parts.size() != 3) throw ConfigError("periodic shift needs a word: shift:periodic:<word>");
      return ergodic::SystemSpec::shift(ergodic::SymbolSource::periodic(parts[2]));
    }
    throw ConfigError("unknown shift source \"" + src + "\"");
  }
  throw ConfigError("unknown system kind \"" + kind + "\"");
}

ergodic::MeasureScheme parse_measure_scheme(const std::string& s) {
  if (s == "arithmetic" || s == "cesaro") return ergodic::MeasureScheme::Arithmetic;
  if (s == "logarithmic" || s == "log") return ergodic::MeasureScheme::Logarithmic;
  throw ConfigError("unknown scheme \"" + s + "\" (use cesaro|log)");
}

ergodic::GapScheme parse_gap_scheme(const std::string& s) {
  if (s == "cesaro") return ergodic::GapScheme::Cesaro;
  if (s == "log" || s == "logarithmic") return ergodic::GapScheme::Logarithmic;
  if (s == "weyl-cesaro") return ergodic::GapScheme::WeylCesaro;
  if (s == "weyl-log" || s == "weyl-logarithmic") return ergodic::GapScheme::WeylLogarithmic;
  throw ConfigError("unknown scheme \"" + s + "\" (use cesaro|log|weyl-cesaro|weyl-log)");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write output path \"" + path + "\"");
  return os;
}

// Resolved common options shared by all subcommands.
struct CommonOpts {
  std::string system_text;
  std::string config_path;
  std::string json_path;
  std::string csv_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;

  json config_file;

  void load_config_file() {
    if (config_path.empty()) return;
    std::ifstream is(config_path);
    if (!is) throw ConfigError("cannot read config file \"" + config_path + "\"");
    config_file = json::parse(is, nullptr, false);
    if (config_file.is_discarded()) throw ConfigError("malformed config file JSON");
    if (!config_file.is_object()) throw ConfigError("config file must hold a JSON object");
  }

  // flags > config file > ERGODIC_SEED > default.
  void resolve_seed() {
    if (seed_set) return;
    if (config_file.contains("seed")) {
      seed = config_file["seed"].get<std::uint64_t>();
      return;
    }
    if (const char* env = std::getenv("ERGODIC_SEED")) {
      try {
        seed = std::stoull(env);
      } catch (const std::exception&) {
        throw ConfigError("ERGODIC_SEED is not an unsigned integer");
      }
    }
  }

  template <typename T>
  void fill_from_config(const CLI::Option* opt, const char* key, T& value) {
    if (opt != nullptr && opt->count() > 0) return;
    if (config_file.contains(key)) value = config_file[key].get<T>();
  }

  ergodic::SystemSpec system() {
    if (system_text.empty() && config_file.contains("system")) {
      const json& s = config_file["system"];
      if (s.is_string()) {
        system_text = s.get<std::string>();
      } else {
        try {
          return ergodic::system_from_json(s);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
    }
    return parse_system(system_text);
  }

  int resolved_threads() const {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--system", c.system_text, "system shorthand or inline JSON");
  cmd->add_option("--config", c.config_path, "JSON config file (flags take precedence)");
  cmd->add_option("--json", c.json_path, "write a JSON report to this path");
  cmd->add_option("--csv", c.csv_path, "write CSV data to this path");
  cmd->add_option("--seed", c.seed, "master RNG seed");
  cmd->add_option("--threads", c.threads, "worker thread cap (default: hardware)");
}

json common_config_json(const CommonOpts& c, const ergodic::SystemSpec& sys) {
  return json{{"system", ergodic::system_to_json(sys)},
              {"seed", c.seed},
              {"threads", c.resolved_threads()},
              {"version", kVersion}};
}

void emit_json(const CommonOpts& c, const json& doc) {
  if (c.json_path.empty()) return;
  std::ofstream os = open_output(c.json_path);
  os << doc.dump(2) << '\n';
}

// Start-point parsing: circle systems take positions in [0,1); shift systems
// take integer offsets of the system source.
ergodic::PointRef parse_start(const ergodic::SystemSpec& sys, const std::string& token) {
  try {
    if (sys.is_circle()) return sys.point_at(ergodic::frac(named_alpha(token)));
    if (sys.kind() == ergodic::SystemKind::BinaryShift)
      return sys.shift_point(static_cast<std::uint64_t>(std::stoull(token)));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad start point \"") + token + "\": " + e.what());
  }
  throw ConfigError("start points on product systems are not supported from the command line");
}

std::vector<std::uint64_t> resolved_schedule(std::uint64_t n0, double ratio, std::uint64_t n) {
  return ergodic::geometric_schedule(std::min(n0, n), ratio, n, true);
}

// ---------------------------------------------------------------------------
// average: Cesaro/log averages of the pair distance trace along the schedule.
// ---------------------------------------------------------------------------
int run_average(CommonOpts& c, const std::string& x_tok, const std::string& y_tok,
                std::uint64_t n, const std::string& scheme, std::uint64_t n0, double ratio,
                double window_fraction) {
  if (scheme != "both" && scheme != "cesaro" && scheme != "log")
    throw ConfigError("unknown scheme \"" + scheme + "\" (use cesaro|log|both)");
  ergodic::SystemSpec sys = c.system();
  ergodic::PointRef x = parse_start(sys, x_tok);
  ergodic::PointRef y = parse_start(sys, y_tok);
  const auto schedule = resolved_schedule(n0, ratio, n);
  const ergodic::RealTrace trace =
      ergodic::pair_distance_trace(sys, x, y, static_cast<std::size_t>(n));

  std::vector<double> ces, lg, gap;
  ces.reserve(schedule.size());
  for (std::uint64_t m : schedule) {
    ces.push_back(ergodic::cesaro_avg(trace, 0, m));
    lg.push_back(ergodic::log_avg(trace, 0, m));
    gap.push_back(std::abs(ces.back() - lg.back()));
  }
  if (!c.csv_path.empty()) {
    std::ofstream os = open_output(c.csv_path);
    ergodic::write_csv_row(os, {"n", "cesaro", "log", "gap"});
    for (std::size_t i = 0; i < schedule.size(); ++i)
      ergodic::write_csv_row(os, {std::to_string(schedule[i]), ergodic::format_double(ces[i]),
                                  ergodic::format_double(lg[i]), ergodic::format_double(gap[i])});
  }
  const auto ct = ergodic::tail_estimates(ces, window_fraction);
  const auto lt = ergodic::tail_estimates(lg, window_fraction);
  json doc{{"config", common_config_json(c, sys)},
           {"n", n},
           {"scheme", scheme},
           {"x", x_tok},
           {"y", y_tok},
           {"schedule", {{"n0", n0}, {"ratio", ratio}, {"window_fraction", window_fraction}}},
           {"cesaro_tail", {{"sup", ct.sup_est}, {"inf", ct.inf_est}}},
           {"log_tail", {{"sup", lt.sup_est}, {"inf", lt.inf_est}}}};
  emit_json(c, doc);
  std::cout << "average: n=" << n << " cesaro=[" << ct.inf_est << ", " << ct.sup_est << "] log=["
            << lt.inf_est << ", " << lt.sup_est << "]\n";
  return 0;
}

// ---------------------------------------------------------------------------
// vset: cluster empirical measures along the schedule tail.
// ---------------------------------------------------------------------------
int run_vset(CommonOpts& c, const std::string& x_tok, std::uint64_t n, const std::string& scheme,
             double cluster_tol, std::uint64_t n0, double ratio, double window_fraction,
             int depth) {
  ergodic::SystemSpec sys = c.system();
  ergodic::PointRef x = parse_start(sys, x_tok);
  const auto family = ergodic::TestFamily::for_system(sys, depth);
  const auto schedule = resolved_schedule(n0, ratio, n);
  const ergodic::MeasureSet set = ergodic::vset_estimate(
      sys, x, schedule, parse_measure_scheme(scheme), cluster_tol, family, window_fraction);

  if (!c.csv_path.empty()) {
    std::ofstream os = open_output(c.csv_path);
    ergodic::write_csv_row(os, {"rep", "k", "point", "weight"});
    for (std::size_t r = 0; r < set.members.size(); ++r)
      ergodic::measure_atoms_csv(os, set.members[r], static_cast<int>(r));
  }
  json reps = json::array();
  for (const auto& m : set.members) reps.push_back(ergodic::measure_summary_json(m, family));
  json doc{{"config", common_config_json(c, sys)},
           {"scheme", scheme},
           {"cluster_tol", cluster_tol},
           {"cluster_count", set.members.size()},
           {"representatives", std::move(reps)},
           {"rho_truncation_bound", family.truncation_bound()},
           {"schedule_note", "finite schedules can miss accumulation points"}};
  emit_json(c, doc);
  std::cout << "vset: clusters=" << set.members.size() << " scheme=" << scheme
            << " tol=" << cluster_tol << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// defect: pushforward invariance defect along an n grid.
// ---------------------------------------------------------------------------
int run_defect(CommonOpts& c, const std::string& x_tok, const std::string& n_list,
               const std::string& scheme, int depth) {
  ergodic::SystemSpec sys = c.system();
  ergodic::PointRef x = parse_start(sys, x_tok);
  const auto family = ergodic::TestFamily::for_system(sys, depth);
  const ergodic::MeasureScheme ms = parse_measure_scheme(scheme);

  std::vector<std::uint64_t> grid;
  std::stringstream ss(n_list);
  std::string tok;
  while (std::getline(ss, tok, ',')) grid.push_back(std::stoull(tok));
  if (grid.empty()) throw ConfigError("defect: empty --n-grid");

  json rows = json::array();
  std::optional<std::ofstream> os;
  if (!c.csv_path.empty()) {
    os = open_output(c.csv_path);
    ergodic::write_csv_row(*os, {"n", "defect", "bound"});
  }
  double worst_ratio = 0.0;
  for (std::uint64_t n : grid) {
    const double defect =
        ergodic::pushforward_defect(sys, ergodic::empirical(sys, x, 0, n, ms), family);
    const double bound = ms == ergodic::MeasureScheme::Logarithmic
                             ? 3.0 / ergodic::harmonic(n)
                             : 2.0 / static_cast<double>(n);
    worst_ratio = std::max(worst_ratio, defect / bound);
    rows.push_back(json{{"n", n}, {"defect", defect}, {"bound", bound}});
    if (os)
      ergodic::write_csv_row(*os, {std::to_string(n), ergodic::format_double(defect),
                                   ergodic::format_double(bound)});
  }
  json doc{{"config", common_config_json(c, sys)},
           {"scheme", scheme},
           {"rows", std::move(rows)},
           {"worst_defect_to_bound_ratio", worst_ratio}};
  emit_json(c, doc);
  std::cout << "defect: scheme=" << scheme << " worst defect/bound = " << worst_ratio << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// modulus: delta(eps) profile.
// ---------------------------------------------------------------------------
int run_modulus(CommonOpts& c, std::uint64_t n, const std::string& scheme, int eps_levels,
                int samples) {
  ergodic::SystemSpec sys = c.system();
  const ergodic::GapScheme gs = parse_gap_scheme(scheme);
  std::vector<double> eps_grid;
  for (int e = 1; e <= eps_levels; ++e) eps_grid.push_back(std::ldexp(1.0, -e));
  ergodic::SweepOptions opts;
  opts.seed = c.seed;
  opts.threads = c.resolved_threads();
  const ergodic::ModulusProfile profile = ergodic::modulus_profile(
      sys, eps_grid, ergodic::ball_pair_sampler(sys), n, gs, samples, opts);

  if (!c.csv_path.empty()) {
    std::ofstream os = open_output(c.csv_path);
    ergodic::write_csv_row(os, {"eps", "delta", "scheme", "n", "samples"});
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
      ergodic::write_csv_row(
          os, {ergodic::format_double(eps_grid[i]),
               profile.delta_of_eps[i] ? ergodic::format_double(*profile.delta_of_eps[i]) : "fail",
               scheme, std::to_string(n), std::to_string(samples)});
    }
  }
  json doc{{"config", common_config_json(c, sys)}, {"profile", ergodic::modulus_to_json(profile)}};
  emit_json(c, doc);
  std::cout << "modulus: scheme=" << scheme << " complete=" << (profile.complete() ? "yes" : "no")
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sensitivity.
// ---------------------------------------------------------------------------
int run_sensitivity(CommonOpts& c, std::uint64_t n, const std::string& scheme, int pairs,
                    double radius, bool mu_sampling, double quantile) {
  ergodic::SystemSpec sys = c.system();
  ergodic::SensitivityOptions opts;
  opts.seed = c.seed;
  opts.threads = c.resolved_threads();
  opts.ball_radius = radius;
  opts.quantile = quantile;
  const ergodic::PairSampler sampler =
      mu_sampling ? ergodic::product_measure_sampler(sys) : ergodic::ball_pair_sampler(sys);
  const ergodic::SensitivityReport report =
      ergodic::sensitivity_estimate(sys, sampler, n, parse_gap_scheme(scheme), pairs, opts);
  json doc{{"config", common_config_json(c, sys)},
           {"mu_sampling", mu_sampling},
           {"radius", radius},
           {"report", ergodic::sensitivity_to_json(report)}};
  emit_json(c, doc);
  std::cout << "sensitivity: eps_estimate=" << report.eps_estimate
            << (report.degenerate ? " (degenerate sampler)" : "") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// dichotomy.
// ---------------------------------------------------------------------------
int run_dichotomy(CommonOpts& c, std::uint64_t n, const std::string& scheme, int samples,
                  int pairs, double threshold) {
  ergodic::SystemSpec sys = c.system();
  ergodic::DichotomyConfig cfg;
  cfg.n_eval = n;
  cfg.scheme = parse_gap_scheme(scheme);
  cfg.samples_per_delta = samples;
  cfg.pair_count = pairs;
  cfg.sensitivity_threshold = threshold;
  cfg.seed = c.seed;
  cfg.threads = c.resolved_threads();
  const ergodic::DichotomyVerdict verdict = ergodic::dichotomy_classify(sys, cfg);
  json doc{{"config", common_config_json(c, sys)},
           {"threshold", threshold},
           {"result", ergodic::dichotomy_to_json(verdict)}};
  emit_json(c, doc);
  std::cout << "dichotomy: verdict=" << ergodic::verdict_name(verdict.verdict) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// unique-ergodicity.
// ---------------------------------------------------------------------------
int run_unique_ergodicity(CommonOpts& c, const std::string& starts_list, int random_starts,
                          std::uint64_t n, const std::string& scheme, double tol, int depth) {
  ergodic::SystemSpec sys = c.system();
  const auto family = ergodic::TestFamily::for_system(sys, depth);
  std::vector<ergodic::PointRef> starts;
  if (!starts_list.empty()) {
    std::stringstream ss(starts_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) starts.push_back(parse_start(sys, tok));
  }
  if (random_starts > 0) {
    ergodic::SplitMix64 rng = ergodic::SplitMix64::for_stream(c.seed, 0x57A7ull);
    for (int i = 0; i < random_starts; ++i) starts.push_back(sys.random_point(rng));
  }
  if (starts.empty()) throw ConfigError("unique-ergodicity: provide --starts or --random-starts");
  const ergodic::UniqueErgodicityReport report = ergodic::unique_ergodicity_test(
      sys, starts, n, parse_measure_scheme(scheme), family, tol);
  json doc{{"config", common_config_json(c, sys)},
           {"rho_truncation_bound", family.truncation_bound()},
           {"report", ergodic::unique_ergodicity_to_json(report)}};
  emit_json(c, doc);
  std::cout << "unique-ergodicity: verdict="
            << (report.verdict == ergodic::ErgodicityVerdict::UniquelyErgodicConsistent
                    ? "UniquelyErgodicConsistent"
                    : "Inconsistent")
            << " max_rho=" << report.max_pairwise_rho << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// oxtoby.
// ---------------------------------------------------------------------------
int run_oxtoby(CommonOpts& c, const std::string& alpha_tok, std::uint64_t n, std::uint64_t mc) {
  const double alpha = named_alpha(alpha_tok);
  const ergodic::OxtobyReport report = ergodic::oxtoby_experiment(alpha, n, mc, c.seed);
  json doc{{"config",
            json{{"alpha", alpha}, {"n", n}, {"mc", mc}, {"seed", c.seed}, {"version", kVersion}}},
           {"report", ergodic::oxtoby_to_json(report)}};
  emit_json(c, doc);
  std::cout << "oxtoby: avg_at_zero=" << report.avg_at_zero
            << " m_of_U=" << report.m_of_u_estimate << " gap=" << report.gap << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sarnak: Mobius-weighted sums of a rotation observable along the schedule.
// ---------------------------------------------------------------------------
int run_sarnak(CommonOpts& c, std::uint64_t n, const std::string& observable, bool harmonic_norm,
               std::uint64_t n0, double ratio) {
  ergodic::SystemSpec sys = c.system();
  if (sys.kind() != ergodic::SystemKind::CircleRotation)
    throw ConfigError("sarnak: only rotation systems are supported");
  const double alpha = sys.alpha();

  double (*f)(double) = nullptr;
  if (observable == "cos") {
    f = +[](double x) { return std::cos(2.0 * M_PI * x); };
  } else if (observable == "sin") {
    f = +[](double x) { return std::sin(2.0 * M_PI * x); };
  } else {
    throw ConfigError("sarnak: unknown observable \"" + observable + "\" (use cos|sin)");
  }

  // trace index k holds f(T^k 0) = f(frac(k alpha))
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (std::uint64_t k = 1; k <= n; ++k)
    vals[static_cast<std::size_t>(k - 1)] = f(ergodic::mul_mod1(k, alpha));
  const ergodic::RealTrace trace(std::move(vals), 1.0);

  const auto schedule = resolved_schedule(std::max<std::uint64_t>(n0, 2), ratio, n);
  std::optional<std::ofstream> os;
  if (!c.csv_path.empty()) {
    os = open_output(c.csv_path);
    ergodic::write_csv_row(*os, {"n", "cesaro", "log"});
  }
  double last_c = 0.0, last_l = 0.0;
  for (std::uint64_t m : schedule) {
    last_c = ergodic::sarnak_sum(trace, m, false);
    last_l = ergodic::sarnak_sum(trace, m, true, harmonic_norm);
    if (os)
      ergodic::write_csv_row(*os, {std::to_string(m), ergodic::format_double(last_c),
                                   ergodic::format_double(last_l)});
  }
  json doc{{"config", common_config_json(c, sys)},
           {"observable", observable},
           {"n", n},
           {"harmonic_normalization", harmonic_norm},
           {"cesaro_sum", last_c},
           {"logarithmic_sum", last_l}};
  emit_json(c, doc);
  std::cout << "sarnak: N=" << n << " cesaro=" << last_c << " log=" << last_l << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report: a standard battery on one system in a single JSON document.
// ---------------------------------------------------------------------------
int run_report(CommonOpts& c, std::uint64_t n, int depth) {
  ergodic::SystemSpec sys = c.system();
  const auto family = ergodic::TestFamily::for_system(sys, depth);

  ergodic::SplitMix64 rng = ergodic::SplitMix64::for_stream(c.seed, 0x88ull);
  std::vector<ergodic::PointRef> starts;
  for (int i = 0; i < 8; ++i) starts.push_back(sys.random_point(rng));
  const auto ue_a = ergodic::unique_ergodicity_test(sys, starts, n,
                                                    ergodic::MeasureScheme::Arithmetic, family, 0.01);

  ergodic::DichotomyConfig cfg;
  cfg.n_eval = std::min<std::uint64_t>(n, 20000);
  cfg.seed = c.seed;
  cfg.threads = c.resolved_threads();
  const auto dich = ergodic::dichotomy_classify(sys, cfg);

  const auto mu = ergodic::empirical(sys, starts[0], 0, n, ergodic::MeasureScheme::Logarithmic);
  const double defect = ergodic::pushforward_defect(sys, mu, family);

  json doc{{"config", common_config_json(c, sys)},
           {"n", n},
           {"unique_ergodicity_arithmetic", ergodic::unique_ergodicity_to_json(ue_a)},
           {"dichotomy", ergodic::dichotomy_to_json(dich)},
           {"log_empirical_defect", defect},
           {"log_empirical_defect_bound", 3.0 / ergodic::harmonic(n)}};
  emit_json(c, doc);
  std::cout << "report: ue="
            << (ue_a.verdict == ergodic::ErgodicityVerdict::UniquelyErgodicConsistent
                    ? "consistent"
                    : "inconsistent")
            << " dichotomy=" << ergodic::verdict_name(dich.verdict) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergodic averaging experiments"};
  app.require_subcommand(1);

  // average
  CommonOpts c_avg;
  std::string avg_x = "0", avg_y = "0.25", avg_scheme = "both";
  std::uint64_t avg_n = 100000, avg_n0 = ergodic::kDefaultScheduleStart;
  double avg_ratio = ergodic::kDefaultScheduleRatio, avg_wf = ergodic::kDefaultWindowFraction;
  auto* avg = app.add_subcommand("average", "pair-distance averages along a schedule");
  add_common(avg, c_avg);
  avg->add_option("--x", avg_x, "first start point");
  avg->add_option("--y", avg_y, "second start point");
  auto* avg_n_opt = avg->add_option("--n", avg_n, "horizon");
  avg->add_option("--scheme", avg_scheme, "cesaro|log|both (summary only; CSV has both)");
  avg->add_option("--n0", avg_n0, "schedule start");
  avg->add_option("--ratio", avg_ratio, "schedule ratio");
  avg->add_option("--window-fraction", avg_wf, "tail window fraction");

  // vset
  CommonOpts c_vset;
  std::string vset_x = "0", vset_scheme = "arithmetic";
  std::uint64_t vset_n = 100000, vset_n0 = ergodic::kDefaultScheduleStart;
  double vset_ratio = ergodic::kDefaultScheduleRatio, vset_wf = ergodic::kDefaultWindowFraction;
  double vset_tol = 0.05;
  int vset_depth = ergodic::TestFamily::kDefaultDepth;
  auto* vset = app.add_subcommand("vset", "estimate the set of empirical-measure limits");
  add_common(vset, c_vset);
  auto* vset_n_opt = vset->add_option("--n", vset_n, "horizon");
  vset->add_option("--x", vset_x, "start point");
  vset->add_option("--scheme", vset_scheme, "cesaro|log");
  vset->add_option("--cluster-tol", vset_tol, "rho clustering threshold");
  vset->add_option("--n0", vset_n0, "schedule start");
  vset->add_option("--ratio", vset_ratio, "schedule ratio");
  vset->add_option("--window-fraction", vset_wf, "schedule tail fraction");
  vset->add_option("--family-depth", vset_depth, "test family depth J");

  // defect
  CommonOpts c_def;
  std::string def_x = "0", def_grid = "10,100,1000,10000", def_scheme = "logarithmic";
  int def_depth = ergodic::TestFamily::kDefaultDepth;
  auto* def = app.add_subcommand("defect", "pushforward invariance defect of empirical measures");
  add_common(def, c_def);
  def->add_option("--x", def_x, "start point");
  def->add_option("--n-grid", def_grid, "comma-separated horizons");
  def->add_option("--scheme", def_scheme, "cesaro|log");
  def->add_option("--family-depth", def_depth, "test family depth J");

  // modulus
  CommonOpts c_mod;
  std::string mod_scheme = "cesaro";
  std::uint64_t mod_n = 10000;
  int mod_eps_levels = 10, mod_samples = 16;
  auto* mod = app.add_subcommand("modulus", "mean-equicontinuity modulus profile");
  add_common(mod, c_mod);
  auto* mod_n_opt = mod->add_option("--n", mod_n, "horizon");
  mod->add_option("--scheme", mod_scheme, "cesaro|log|weyl-cesaro|weyl-log");
  mod->add_option("--eps-levels", mod_eps_levels, "dyadic eps grid depth");
  mod->add_option("--samples", mod_samples, "pairs per delta evaluation");

  // sensitivity
  CommonOpts c_sen;
  std::string sen_scheme = "cesaro";
  std::uint64_t sen_n = 100000;
  int sen_pairs = 100;
  double sen_radius = 0.00390625, sen_quantile = 0.10;
  bool sen_mu = false;
  auto* sen = app.add_subcommand("sensitivity", "mean-sensitivity constant estimate");
  add_common(sen, c_sen);
  auto* sen_n_opt = sen->add_option("--n", sen_n, "horizon");
  sen->add_option("--scheme", sen_scheme, "cesaro|log|weyl-cesaro|weyl-log");
  sen->add_option("--pairs", sen_pairs, "sampled pair count (>= 30)");
  sen->add_option("--radius", sen_radius, "ball radius for topological sampling");
  sen->add_flag("--mu", sen_mu, "sample pairs from the product of the natural measure");
  sen->add_option("--quantile", sen_quantile, "low quantile reported as the estimate");

  // dichotomy
  CommonOpts c_dic;
  std::string dic_scheme = "cesaro";
  std::uint64_t dic_n = 100000;
  int dic_samples = 8, dic_pairs = 64;
  double dic_threshold = 0.05;
  auto* dic = app.add_subcommand("dichotomy", "mean equicontinuous vs mean sensitive verdict");
  add_common(dic, c_dic);
  auto* dic_n_opt = dic->add_option("--n", dic_n, "horizon");
  dic->add_option("--scheme", dic_scheme, "cesaro|log|weyl-cesaro|weyl-log");
  dic->add_option("--samples", dic_samples, "pairs per delta evaluation");
  dic->add_option("--pairs", dic_pairs, "sensitivity pair count");
  dic->add_option("--threshold", dic_threshold, "sensitivity threshold");

  // unique-ergodicity
  CommonOpts c_ue;
  std::string ue_starts;
  int ue_random = 0, ue_depth = ergodic::TestFamily::kDefaultDepth;
  std::uint64_t ue_n = 100000;
  std::string ue_scheme = "arithmetic";
  double ue_tol = 0.01;
  auto* ue = app.add_subcommand("unique-ergodicity", "empirical-measure consistency across starts");
  add_common(ue, c_ue);
  auto* ue_n_opt = ue->add_option("--n", ue_n, "horizon");
  ue->add_option("--starts", ue_starts, "comma-separated start points");
  ue->add_option("--random-starts", ue_random, "additional random start count");
  ue->add_option("--scheme", ue_scheme, "cesaro|log");
  ue->add_option("--tol", ue_tol, "max pairwise rho tolerance");
  ue->add_option("--family-depth", ue_depth, "test family depth J");

  // oxtoby
  CommonOpts c_ox;
  std::string ox_alpha = "phi";
  std::uint64_t ox_n = 10000, ox_mc = 100000;
  auto* ox = app.add_subcommand("oxtoby", "discontinuous-observable counterexample experiment");
  add_common(ox, c_ox);
  ox->add_option("--alpha", ox_alpha, "rotation angle (phi|sqrt2|number)");
  auto* ox_n_opt = ox->add_option("--n", ox_n, "orbit average length");
  ox->add_option("--mc", ox_mc, "Monte Carlo samples for m(U)");

  // sarnak
  CommonOpts c_sar;
  std::string sar_obs = "cos";
  std::uint64_t sar_n = 1000000, sar_n0 = 64;
  double sar_ratio = 2.0;
  bool sar_hnorm = false;
  auto* sar = app.add_subcommand("sarnak", "Mobius-weighted orbit sums");
  add_common(sar, c_sar);
  auto* sar_n_opt = sar->add_option("--n", sar_n, "horizon N");
  sar->add_option("--observable", sar_obs, "cos|sin");
  sar->add_flag("--harmonic-norm", sar_hnorm, "normalize the log form by H_N instead of log N");
  sar->add_option("--n0", sar_n0, "schedule start");
  sar->add_option("--ratio", sar_ratio, "schedule ratio");

  // report
  CommonOpts c_rep;
  std::uint64_t rep_n = 100000;
  int rep_depth = ergodic::TestFamily::kDefaultDepth;
  auto* rep = app.add_subcommand("report", "standard battery on one system");
  add_common(rep, c_rep);
  auto* rep_n_opt = rep->add_option("--n", rep_n, "horizon");
  rep->add_option("--family-depth", rep_depth, "test family depth J");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto prepare = [](CommonOpts& c, CLI::App* cmd) {
      c.load_config_file();
      c.fill_from_config(cmd->get_option_no_throw("--threads"), "threads", c.threads);
      if (cmd->get_option_no_throw("--seed")->count() > 0) c.seed_set = true;
      c.resolve_seed();
    };
    if (avg->parsed()) {
      prepare(c_avg, avg);
      c_avg.fill_from_config(avg_n_opt, "n", avg_n);
      c_avg.fill_from_config(avg->get_option_no_throw("--x"), "x", avg_x);
      c_avg.fill_from_config(avg->get_option_no_throw("--y"), "y", avg_y);
      return run_average(c_avg, avg_x, avg_y, avg_n, avg_scheme, avg_n0, avg_ratio, avg_wf);
    }
    if (vset->parsed()) {
      prepare(c_vset, vset);
      c_vset.fill_from_config(vset_n_opt, "n", vset_n);
      return run_vset(c_vset, vset_x, vset_n, vset_scheme, vset_tol, vset_n0, vset_ratio, vset_wf,
                      vset_depth);
    }
    if (def->parsed()) {
      prepare(c_def, def);
      return run_defect(c_def, def_x, def_grid, def_scheme, def_depth);
    }
    if (mod->parsed()) {
      prepare(c_mod, mod);
      c_mod.fill_from_config(mod_n_opt, "n", mod_n);
      return run_modulus(c_mod, mod_n, mod_scheme, mod_eps_levels, mod_samples);
    }
    if (sen->parsed()) {
      prepare(c_sen, sen);
      c_sen.fill_from_config(sen_n_opt, "n", sen_n);
      return run_sensitivity(c_sen, sen_n, sen_scheme, sen_pairs, sen_radius, sen_mu, sen_quantile);
    }
    if (dic->parsed()) {
      prepare(c_dic, dic);
      c_dic.fill_from_config(dic_n_opt, "n", dic_n);
      return run_dichotomy(c_dic, dic_n, dic_scheme, dic_samples, dic_pairs, dic_threshold);
    }
    if (ue->parsed()) {
      prepare(c_ue, ue);
      c_ue.fill_from_config(ue_n_opt, "n", ue_n);
      return run_unique_ergodicity(c_ue, ue_starts, ue_random, ue_n, ue_scheme, ue_tol, ue_depth);
    }
    if (ox->parsed()) {
      prepare(c_ox, ox);
      c_ox.fill_from_config(ox_n_opt, "n", ox_n);
      return run_oxtoby(c_ox, ox_alpha, ox_n, ox_mc);
    }
    if (sar->parsed()) {
      prepare(c_sar, sar);
      c_sar.fill_from_config(sar_n_opt, "n", sar_n);
      return run_sarnak(c_sar, sar_n, sar_obs, sar_hnorm, sar_n0, sar_ratio);
    }
    if (rep->parsed()) {
      prepare(c_rep, rep);
      c_rep.fill_from_config(rep_n_opt, "n", rep_n);
      return run_report(c_rep, rep_n, rep_depth);
    }
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
