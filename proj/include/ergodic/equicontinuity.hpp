#pragma once

// Mean-equicontinuity moduli, mean-sensitivity estimators, the
// equicontinuous/sensitive dichotomy verdict, the unique-ergodicity detector,
// and the discontinuous-observable counterexample experiment on the rotation.
//
// Limits over n are replaced by tail extrema along a geometric evaluation
// schedule; verdicts from finite evidence may abstain (Undetermined).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ergodic/averaging.hpp"
#include "ergodic/measures.hpp"
#include "ergodic/numeric.hpp"
#include "ergodic/systems.hpp"

namespace ergodic {

// Averaging schemes for pair gaps. Weyl variants probe windows (m, n) with
// m > 0 instead of prefixes (0, n).
enum class GapScheme { Cesaro, Logarithmic, WeylCesaro, WeylLogarithmic };

inline bool is_logarithmic(GapScheme s) noexcept {
  return s == GapScheme::Logarithmic || s == GapScheme::WeylLogarithmic;
}
inline bool is_weyl(GapScheme s) noexcept {
  return s == GapScheme::WeylCesaro || s == GapScheme::WeylLogarithmic;
}
inline const char* scheme_name(GapScheme s) {
  switch (s) {
    case GapScheme::Cesaro: return "cesaro";
    case GapScheme::Logarithmic: return "logarithmic";
    case GapScheme::WeylCesaro: return "weyl-cesaro";
    case GapScheme::WeylLogarithmic: return "weyl-logarithmic";
  }
  return "?";
}

// Time-averaged orbit distance of the pair (x, y) over the window (m, n).
inline double pair_gap(const SystemSpec& sys, const PointRef& x, const PointRef& y,
                       std::uint64_t m, std::uint64_t n, GapScheme scheme) {
  if (!(m < n)) throw std::out_of_range("pair_gap: window requires m < n");
  const RealTrace trace = pair_distance_trace(sys, x, y, static_cast<std::size_t>(n));
  return is_logarithmic(scheme) ? log_avg(trace, m, n) : cesaro_avg(trace, m, n);
}

// Gap evaluated at every schedule length L: windows (0, L) for the plain
// schemes, (L, 2L) for the Weyl ones. One distance trace serves all points.
inline std::vector<double> pair_gap_schedule(const SystemSpec& sys, const PointRef& x,
                                             const PointRef& y,
                                             const std::vector<std::uint64_t>& schedule,
                                             GapScheme scheme) {
  if (schedule.empty()) throw std::invalid_argument("pair_gap_schedule: empty schedule");
  const std::uint64_t l_max = schedule.back();
  const std::size_t trace_len = static_cast<std::size_t>(is_weyl(scheme) ? 2 * l_max : l_max);
  const RealTrace trace = pair_distance_trace(sys, x, y, trace_len);
  std::vector<double> out;
  out.reserve(schedule.size());
  for (std::uint64_t l : schedule) {
    const std::uint64_t m = is_weyl(scheme) ? l : 0;
    const std::uint64_t n = is_weyl(scheme) ? 2 * l : l;
    out.push_back(is_logarithmic(scheme) ? log_avg(trace, m, n) : cesaro_avg(trace, m, n));
  }
  return out;
}

// |Cesaro - logarithmic| prefix averages of the pair distance trace at each
// schedule point.
inline std::vector<double> cesaro_log_gap(const SystemSpec& sys, const PointRef& x,
                                          const PointRef& y,
                                          const std::vector<std::uint64_t>& schedule) {
  if (schedule.empty()) throw std::invalid_argument("cesaro_log_gap: empty schedule");
  const RealTrace trace = pair_distance_trace(sys, x, y, static_cast<std::size_t>(schedule.back()));
  std::vector<double> out;
  out.reserve(schedule.size());
  for (std::uint64_t n : schedule)
    out.push_back(std::abs(cesaro_avg(trace, 0, n) - log_avg(trace, 0, n)));
  return out;
}

// ---------------------------------------------------------------------------
// Pair samplers.
// ---------------------------------------------------------------------------

struct PairSample {
  PointRef first;
  PointRef second;
};

// Yields a pair with d(x, y) < max_distance; empty on exhaustion.
using PairSampler = std::function<std::optional<PairSample>(SplitMix64&, double)>;

namespace detail {
inline PairSample ball_pair(const SystemSpec& sys, SplitMix64& rng, double max_distance) {
  switch (sys.kind()) {
    case SystemKind::CircleRotation: {
      // Additive offset: d = 2 * arc, so arc offset u * max_d / 2 keeps d < max_d.
      const double x = rng.next_unit();
      const double t = rng.next_unit() * std::min(max_distance, 1.0) / 2.0;
      return {PointRef::rotation(x), PointRef::rotation(frac(x + t))};
    }
    case SystemKind::DoublingMap: {
      // Copy a prefix of the expansion, randomize the tail: j shared bits give
      // d <= 2^{1-j}, so pick j with 2^{1-j} < max_d.
      const double bound = std::min(max_distance, 1.0);
      const auto shared = static_cast<std::uint64_t>(
          std::min(60.0, std::max(0.0, std::floor(std::log2(1.0 / bound)) + 2.0)));
      const BitStream base = BitStream::from_seed(rng.next());
      const BitStream other = BitStream::spliced(base, shared, rng.next());
      return {PointRef::doubling(base), PointRef::doubling(other)};
    }
    case SystemKind::BinaryShift: {
      // Copy a prefix of x, flip the next symbol: d = 2^{-j} exactly.
      const std::uint64_t offset = rng.next() & 0xFFFFFull;
      const double bound = std::min(max_distance, 1.0);
      const auto j = static_cast<std::uint64_t>(
          std::min(63.0, std::max(0.0, std::floor(std::log2(1.0 / bound)) + 1.0)));
      const SymbolSource& src = sys.source();
      std::string word;
      word.reserve(static_cast<std::size_t>(j + 1));
      for (std::uint64_t i = 0; i < j; ++i)
        word.push_back(static_cast<char>('0' + src.symbol(offset + i)));
      word.push_back(static_cast<char>('0' + (1 - src.symbol(offset + j))));
      return {PointRef::shift(src, offset),
              PointRef::shift(SymbolSource::explicit_word(std::move(word), WordExtension::Cycle), 0)};
    }
    case SystemKind::ProductSystem: {
      PairSample l = ball_pair(sys.left(), rng, max_distance);
      PairSample r = ball_pair(sys.right(), rng, max_distance);
      return {PointRef::product(std::move(l.first), std::move(r.first)),
              PointRef::product(std::move(l.second), std::move(r.second))};
    }
  }
  throw std::logic_error("ball_pair: unreachable");
}
}  // namespace detail

// First point from the natural measure, second at controlled distance below
// the requested bound (explicit construction, no rejection).
inline PairSampler ball_pair_sampler(const SystemSpec& sys) {
  return [sys](SplitMix64& rng, double max_distance) -> std::optional<PairSample> {
    if (!(max_distance > 0.0)) return std::nullopt;
    return detail::ball_pair(sys, rng, max_distance);
  };
}

// Independent draws from the natural measure (mu x mu sampling); the distance
// bound is ignored.
inline PairSampler product_measure_sampler(const SystemSpec& sys) {
  return [sys](SplitMix64& rng, double) -> std::optional<PairSample> {
    PointRef a = sys.random_point(rng);
    PointRef b = sys.random_point(rng);
    return PairSample{std::move(a), std::move(b)};
  };
}

// ---------------------------------------------------------------------------
// Parallel sweep helper. Work item i draws from stream (seed, i), so results
// are identical for every thread count; reduction order is fixed by index.
// ---------------------------------------------------------------------------

namespace detail {
template <typename Fn>
void indexed_sweep(std::size_t count, int threads, Fn&& body) {
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Modulus profile: delta(eps) search over a dyadic grid.
// ---------------------------------------------------------------------------

struct ModulusProfile {
  std::vector<double> eps_grid;
  std::vector<std::optional<double>> delta_of_eps;
  GapScheme scheme = GapScheme::Cesaro;
  std::uint64_t n_eval = 0;
  int sample_count = 0;
  bool sampler_exhausted = false;

  bool complete() const noexcept {
    for (const auto& d : delta_of_eps)
      if (!d.has_value()) return false;
    return !delta_of_eps.empty();
  }
};

struct SweepOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::uint64_t schedule_start = kDefaultScheduleStart;
  double schedule_ratio = kDefaultScheduleRatio;
  double window_fraction = kDefaultWindowFraction;
};

// For each eps (positive, decreasing) find the largest dyadic delta in
// {2^-1..2^-20} such that every sampled pair at distance < delta keeps its
// tail-sup gap below eps. The search is capped by the previous row's result,
// which makes delta_of_eps nonincreasing by construction. A row where even
// 2^-20 fails is recorded as a failure, not an error.
inline ModulusProfile modulus_profile(const SystemSpec& sys, const std::vector<double>& eps_grid,
                                      const PairSampler& sampler, std::uint64_t n_eval,
                                      GapScheme scheme, int samples_per_delta,
                                      const SweepOptions& opts = {}) {
  if (eps_grid.empty()) throw std::invalid_argument("modulus_profile: empty eps grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0))
      throw std::invalid_argument("modulus_profile: eps values must be positive");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))
      throw std::invalid_argument("modulus_profile: eps grid must be strictly decreasing");
  }
  if (samples_per_delta < 1)
    throw std::invalid_argument("modulus_profile: samples_per_delta must be >= 1");

  constexpr int kMinExp = 1;
  constexpr int kMaxExp = 20;

  const std::uint64_t l_max = is_weyl(scheme) ? std::max<std::uint64_t>(n_eval / 2, 1) : n_eval;
  const std::vector<std::uint64_t> schedule =
      geometric_schedule(std::min(opts.schedule_start, l_max), opts.schedule_ratio, l_max, true);

  ModulusProfile profile;
  profile.eps_grid = eps_grid;
  profile.scheme = scheme;
  profile.n_eval = n_eval;
  profile.sample_count = samples_per_delta;
  profile.delta_of_eps.assign(eps_grid.size(), std::nullopt);

  // Evaluations are seeded by (delta exponent, sample index) so a row's
  // verdict does not depend on the bisection path that reached it.
  auto row_ok = [&](int exp, double eps) {
    const double delta = std::ldexp(1.0, -exp);
    std::vector<double> sups(static_cast<std::size_t>(samples_per_delta));
    std::vector<char> exhausted(static_cast<std::size_t>(samples_per_delta), 0);
    detail::indexed_sweep(
        static_cast<std::size_t>(samples_per_delta), opts.threads, [&](std::size_t s) {
          SplitMix64 rng = SplitMix64::for_stream(
              opts.seed, (static_cast<std::uint64_t>(exp) << 32) | static_cast<std::uint64_t>(s));
          std::optional<PairSample> pair = sampler(rng, delta);
          if (!pair) {
            exhausted[s] = 1;
            sups[s] = std::numeric_limits<double>::infinity();
            return;
          }
          const std::vector<double> gaps =
              pair_gap_schedule(sys, pair->first, pair->second, schedule, scheme);
          sups[s] = tail_estimates(gaps, opts.window_fraction).sup_est;
        });
    for (char e : exhausted)
      if (e) profile.sampler_exhausted = true;
    for (double s : sups)
      if (!(s < eps)) return false;
    return true;
  };

  int cap_exp = kMinExp;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double eps = eps_grid[i];
    if (row_ok(cap_exp, eps)) {
      profile.delta_of_eps[i] = std::ldexp(1.0, -cap_exp);
      continue;
    }
    if (!row_ok(kMaxExp, eps)) {
      cap_exp = kMaxExp;  // failure; smaller eps rows cannot do better
      continue;
    }
    int lo = cap_exp;  // fails
    int hi = kMaxExp;  // passes
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      if (row_ok(mid, eps)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    profile.delta_of_eps[i] = std::ldexp(1.0, -hi);
    cap_exp = hi;
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Sensitivity estimate.
// ---------------------------------------------------------------------------

struct SensitivityReport {
  double eps_estimate = 0.0;
  int pair_count = 0;
  std::uint64_t horizon = 0;
  GapScheme scheme = GapScheme::Cesaro;
  double quantile_used = 0.10;
  bool degenerate = false;  // every sampled pair was identical
};

struct SensitivityOptions {
  double quantile = 0.10;
  double ball_radius = 1.0;  // max distance passed to the sampler
  std::uint64_t seed = 0;
  int threads = 1;
  std::uint64_t schedule_start = kDefaultScheduleStart;
  double schedule_ratio = kDefaultScheduleRatio;
  double window_fraction = kDefaultWindowFraction;
};

// Tail-inf gaps over sampled pairs, reported at a low quantile rather than
// the minimum so one unlucky pair at finite n does not dominate.
inline SensitivityReport sensitivity_estimate(const SystemSpec& sys, const PairSampler& sampler,
                                              std::uint64_t n_eval, GapScheme scheme,
                                              int pair_count,
                                              const SensitivityOptions& opts = {}) {
  if (pair_count < 30) throw std::invalid_argument("sensitivity_estimate: pair_count must be >= 30");
  const std::uint64_t l_max = is_weyl(scheme) ? std::max<std::uint64_t>(n_eval / 2, 1) : n_eval;
  const std::vector<std::uint64_t> schedule =
      geometric_schedule(std::min(opts.schedule_start, l_max), opts.schedule_ratio, l_max, true);

  std::vector<double> tails(static_cast<std::size_t>(pair_count),
                            std::numeric_limits<double>::quiet_NaN());
  std::vector<char> identical(static_cast<std::size_t>(pair_count), 0);
  detail::indexed_sweep(static_cast<std::size_t>(pair_count), opts.threads, [&](std::size_t i) {
    SplitMix64 rng = SplitMix64::for_stream(opts.seed, i);
    std::optional<PairSample> pair = sampler(rng, opts.ball_radius);
    if (!pair) return;
    if (distance(sys, pair->first, pair->second) == 0.0) identical[i] = 1;
    const std::vector<double> gaps =
        pair_gap_schedule(sys, pair->first, pair->second, schedule, scheme);
    tails[i] = tail_estimates(gaps, opts.window_fraction).inf_est;
  });

  std::vector<double> collected;
  collected.reserve(tails.size());
  bool all_identical = true;
  for (std::size_t i = 0; i < tails.size(); ++i) {
    if (std::isnan(tails[i])) continue;
    collected.push_back(tails[i]);
    if (!identical[i]) all_identical = false;
  }
  if (collected.empty())
    throw std::runtime_error("sensitivity_estimate: sampler produced no pairs");

  std::sort(collected.begin(), collected.end());
  SensitivityReport report;
  report.eps_estimate = quantile_sorted(collected, opts.quantile);
  report.pair_count = static_cast<int>(collected.size());
  report.horizon = n_eval;
  report.scheme = scheme;
  report.quantile_used = opts.quantile;
  report.degenerate = all_identical;
  return report;
}

// ---------------------------------------------------------------------------
// Dichotomy verdict.
// ---------------------------------------------------------------------------

enum class Verdict { MeanEquicontinuous, MeanSensitive, Undetermined };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::MeanEquicontinuous: return "MeanEquicontinuous";
    case Verdict::MeanSensitive: return "MeanSensitive";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "?";
}

struct DichotomyConfig {
  std::uint64_t n_eval = 10000;
  GapScheme scheme = GapScheme::Cesaro;
  std::vector<double> eps_grid = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  int samples_per_delta = 8;
  int pair_count = 64;
  double sensitivity_threshold = 0.05;
  double sensitivity_radius = 0.00390625;  // 2^-8 ball for the sensitivity sweep
  std::uint64_t seed = 0;
  int threads = 1;
};

struct DichotomyVerdict {
  Verdict verdict = Verdict::Undetermined;
  ModulusProfile modulus;
  SensitivityReport sensitivity;
};

// The dichotomy holds in the limit and only for minimal systems (which is the
// caller's assertion); finite evidence is allowed to abstain. A complete
// modulus row together with a sensitivity estimate above threshold is
// conflicting evidence and also abstains.
inline DichotomyVerdict dichotomy_classify(const SystemSpec& sys, const DichotomyConfig& cfg) {
  SweepOptions sweep;
  sweep.seed = cfg.seed;
  sweep.threads = cfg.threads;
  SensitivityOptions sopts;
  sopts.seed = splitmix64_mix(cfg.seed ^ 0x5EED5EED5EED5EEDull);
  sopts.threads = cfg.threads;
  sopts.ball_radius = cfg.sensitivity_radius;

  DichotomyVerdict out;
  const PairSampler sampler = ball_pair_sampler(sys);
  out.modulus = modulus_profile(sys, cfg.eps_grid, sampler, cfg.n_eval, cfg.scheme,
                                cfg.samples_per_delta, sweep);
  out.sensitivity =
      sensitivity_estimate(sys, sampler, cfg.n_eval, cfg.scheme, cfg.pair_count, sopts);

  const bool profile_complete = out.modulus.complete();
  const bool sensitive = out.sensitivity.eps_estimate >= cfg.sensitivity_threshold;
  if (profile_complete && sensitive) {
    out.verdict = Verdict::Undetermined;
  } else if (profile_complete) {
    out.verdict = Verdict::MeanEquicontinuous;
  } else if (sensitive) {
    out.verdict = Verdict::MeanSensitive;
  } else {
    out.verdict = Verdict::Undetermined;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unique ergodicity detector.
// ---------------------------------------------------------------------------

enum class ErgodicityVerdict { UniquelyErgodicConsistent, Inconsistent };

struct UniqueErgodicityReport {
  ErgodicityVerdict verdict = ErgodicityVerdict::UniquelyErgodicConsistent;
  double max_pairwise_rho = 0.0;
  int start_count = 0;
  std::uint64_t horizon = 0;
  MeasureScheme scheme = MeasureScheme::Arithmetic;
  double tolerance = 0.0;
};

// Empirical measures from several starting points must agree (in rho) when
// the system is uniquely ergodic. A single start is vacuously consistent.
inline UniqueErgodicityReport unique_ergodicity_test(const SystemSpec& sys,
                                                     const std::vector<PointRef>& starts,
                                                     std::uint64_t n, MeasureScheme scheme,
                                                     const TestFamily& family, double tol) {
  if (starts.empty()) throw std::invalid_argument("unique_ergodicity_test: no start points");
  if (n == 0) throw std::invalid_argument("unique_ergodicity_test: horizon must be >= 1");
  std::vector<std::vector<double>> integrals;
  integrals.reserve(starts.size());
  for (const PointRef& x : starts)
    integrals.push_back(family_integrals(empirical(sys, x, 0, n, scheme), family));

  double max_rho = 0.0;
  for (std::size_t i = 0; i < integrals.size(); ++i) {
    for (std::size_t j = i + 1; j < integrals.size(); ++j)
      max_rho = std::max(max_rho, rho_from_integrals(integrals[i], integrals[j]));
  }

  UniqueErgodicityReport report;
  report.max_pairwise_rho = max_rho;
  report.start_count = static_cast<int>(starts.size());
  report.horizon = n;
  report.scheme = scheme;
  report.tolerance = tol;
  report.verdict = max_rho <= tol ? ErgodicityVerdict::UniquelyErgodicConsistent
                                  : ErgodicityVerdict::Inconsistent;
  return report;
}

// ---------------------------------------------------------------------------
// Oxtoby counterexample experiment.
// ---------------------------------------------------------------------------

struct OxtobyReport {
  double avg_at_zero = 0.0;
  double m_of_u_estimate = 0.0;
  double gap = 0.0;
  double alpha = 0.0;
  std::uint64_t n = 0;
  std::uint64_t mc_samples = 0;
};

// U is a union of intervals around the rotation orbit of 0, with interval j
// centered at frac(j alpha) and total length at most 1/2, so m(U) <= 1/2.
// The indicator of U is not continuous, and the Birkhoff average at 0 tends
// to 1 while the space average stays below 1/2: uniform convergence of orbit
// averages fails for discontinuous observables even on a uniquely ergodic
// system.
namespace detail {
constexpr int kOxtobyIntervalCount = 64;  // radii beyond this are sub-ulp

inline bool oxtoby_member(double q, double alpha) {
  for (int j = 1; j <= kOxtobyIntervalCount; ++j) {
    const double center = mul_mod1(static_cast<std::uint64_t>(j), alpha);
    const double radius = std::ldexp(1.0, -(j + 2));
    if (circle_arc(q, center) < radius) return true;
  }
  return false;
}
}  // namespace detail

inline OxtobyReport oxtoby_experiment(double alpha, std::uint64_t n, std::uint64_t mc_samples,
                                      std::uint64_t seed = 0) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("oxtoby_experiment: alpha must lie in (0,1)");
  if (n < 10) throw std::invalid_argument("oxtoby_experiment: n must be >= 10");
  if (mc_samples == 0) throw std::invalid_argument("oxtoby_experiment: mc_samples must be >= 1");

  // Orbit average at 0: the k-th orbit point (k-1) alpha is the center of
  // interval k-1 for k >= 2, hence in U outright; only the k = 1 term (the
  // point 0 itself) needs the geometric membership test.
  const std::uint64_t hits = (detail::oxtoby_member(0.0, alpha) ? 1 : 0) + (n - 1);
  const double avg_at_zero = static_cast<double>(hits) / static_cast<double>(n);

  SplitMix64 rng = SplitMix64::for_stream(seed, 0x0070B1ull);
  std::uint64_t inside = 0;
  for (std::uint64_t i = 0; i < mc_samples; ++i) {
    if (detail::oxtoby_member(rng.next_unit(), alpha)) ++inside;
  }
  const double m_est = static_cast<double>(inside) / static_cast<double>(mc_samples);

  OxtobyReport report;
  report.avg_at_zero = avg_at_zero;
  report.m_of_u_estimate = m_est;
  report.gap = avg_at_zero - m_est;
  report.alpha = alpha;
  report.n = n;
  report.mc_samples = mc_samples;
  return report;
}

// Binomial standard error for an indicator Monte Carlo with worst-case p.
inline double binomial_sigma(std::uint64_t mc_samples, double p = 0.5) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(mc_samples));
}

}  // namespace ergodic
