#pragma once

// Arithmetic (Cesaro) and harmonic (logarithmic) averaging of bounded real
// sequences: windowed means, harmonic numbers, the summation-by-parts split
// relating the two averages, and finite-n tail estimates that stand in for
// limsup/liminf.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergodic/numeric.hpp"

namespace ergodic {

// A finite real sequence x_1..x_n together with a bound >= sup |x_k|.
// Stored zero-based: values()[k-1] is x_k.
class RealTrace {
 public:
  RealTrace(std::vector<double> values, double bound)
      : values_(std::move(values)), bound_(bound) {
    if (values_.empty()) throw std::invalid_argument("RealTrace: sequence must be nonempty");
    if (!(bound_ >= 0.0) || !std::isfinite(bound_))
      throw std::invalid_argument("RealTrace: bound must be finite and nonnegative");
    for (double v : values_) {
      if (!(std::abs(v) <= bound_))
        throw std::invalid_argument("RealTrace: |value| exceeds the declared bound");
    }
  }

  // Convenience constructor that computes the bound from the data.
  static RealTrace from_values(std::vector<double> values) {
    double b = 0.0;
    for (double v : values) b = std::max(b, std::abs(v));
    return RealTrace(std::move(values), b);
  }

  std::size_t size() const noexcept { return values_.size(); }
  double bound() const noexcept { return bound_; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
  double bound_;
};

// Process-wide cache of harmonic numbers H_n = sum_{k<=n} 1/k, extended
// incrementally by direct summation. Reads and extensions share one mutex;
// H_n is only queried at schedule points, never in inner loops.
class HarmonicTable {
 public:
  static HarmonicTable& instance() {
    static HarmonicTable table;
    return table;
  }

  double value(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("harmonic: n must be >= 1");
    std::lock_guard<std::mutex> lock(mutex_);
    while (h_.size() < n) {
      h_.push_back(h_.back() + 1.0 / static_cast<double>(h_.size() + 1));
    }
    return h_[n - 1];
  }

 private:
  HarmonicTable() : h_{1.0} {}
  std::mutex mutex_;
  std::vector<double> h_;
};

// H_n, memoized per process.
inline double harmonic(std::uint64_t n) { return HarmonicTable::instance().value(n); }

namespace detail {
inline void check_window(const RealTrace& trace, std::size_t m, std::size_t n, const char* op) {
  if (!(m < n)) throw std::out_of_range(std::string(op) + ": window requires m < n");
  if (n > trace.size()) throw std::out_of_range(std::string(op) + ": window end exceeds trace length");
}
}  // namespace detail

// (1/(n-m)) sum_{k=m+1}^{n} x_k.
inline double cesaro_avg(const RealTrace& trace, std::size_t m, std::size_t n) {
  detail::check_window(trace, m, n, "cesaro_avg");
  CompensatedSum acc;
  const auto vals = trace.values();
  for (std::size_t k = m; k < n; ++k) acc.add(vals[k]);
  return acc.value() / static_cast<double>(n - m);
}

// (1/H_{n-m}) sum_{k=m+1}^{n} x_k / (k-m).
inline double log_avg(const RealTrace& trace, std::size_t m, std::size_t n) {
  detail::check_window(trace, m, n, "log_avg");
  CompensatedSum acc;
  const auto vals = trace.values();
  for (std::size_t k = m; k < n; ++k) {
    acc.add(vals[k] / static_cast<double>(k - m + 1));
  }
  return acc.value() / harmonic(n - m);
}

// The summation-by-parts split of the logarithmic average over (0, n]:
//   log_avg = cesaro_term + history_term,
//   cesaro_term  = (1/H_n) * (1/n) sum x_k,
//   history_term = (1/H_n) * sum_{k<n} (1/(k+1)) * A_k,   A_k = k-th prefix mean.
struct SbpTerms {
  double cesaro_term;
  double history_term;
};

inline SbpTerms sbp_decompose(const RealTrace& trace, std::size_t n) {
  detail::check_window(trace, 0, n, "sbp_decompose");
  const auto vals = trace.values();
  CompensatedSum prefix;
  CompensatedSum history;
  double a_n = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    prefix.add(vals[k - 1]);
    const double a_k = prefix.value() / static_cast<double>(k);
    if (k < n) history.add(a_k / static_cast<double>(k + 1));
    a_n = a_k;
  }
  const double hn = harmonic(n);
  return SbpTerms{a_n / hn, history.value() / hn};
}

// Weights of the prefix Cesaro means in the convex-combination form of the
// logarithmic average: log_avg(0,n) = sum_k w_k A_k with
// w_k = 1/((k+1) H_n) for k < n and w_n = 1/H_n. Nonnegative, sums to 1.
inline std::vector<double> log_convex_weights(std::size_t n) {
  if (n == 0) throw std::invalid_argument("log_convex_weights: n must be >= 1");
  const double hn = harmonic(n);
  std::vector<double> w(n);
  for (std::size_t k = 1; k < n; ++k) w[k - 1] = 1.0 / (static_cast<double>(k + 1) * hn);
  w[n - 1] = 1.0 / hn;
  return w;
}

// Finite-n stand-in for limsup/liminf: extrema over the trailing window of a
// value sequence sampled along a growth schedule.
struct TailEstimate {
  std::vector<std::uint64_t> schedule;  // may be empty when only values matter
  std::vector<double> values;
  double sup_est;
  double inf_est;
  double window_fraction;
};

inline TailEstimate tail_estimates(std::vector<double> values, double window_fraction,
                                   std::vector<std::uint64_t> schedule = {}) {
  if (values.empty()) throw std::invalid_argument("tail_estimates: empty value list");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw std::invalid_argument("tail_estimates: window_fraction must lie in (0,1]");
  if (!schedule.empty() && schedule.size() != values.size())
    throw std::invalid_argument("tail_estimates: schedule/value length mismatch");
  const std::size_t len = values.size();
  const std::size_t window =
      std::min(len, static_cast<std::size_t>(
                        std::ceil(window_fraction * static_cast<double>(len))));
  double sup = -std::numeric_limits<double>::infinity();
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = len - window; i < len; ++i) {
    sup = std::max(sup, values[i]);
    inf = std::min(inf, values[i]);
  }
  return TailEstimate{std::move(schedule), std::move(values), sup, inf, window_fraction};
}

// Default evaluation schedule: n_i = ceil(n0 * ratio^i), clipped to n_max.
// Geometric spacing sees every oscillation scale of block constructions.
constexpr std::uint64_t kDefaultScheduleStart = 64;
constexpr double kDefaultScheduleRatio = 1.25;
constexpr double kDefaultWindowFraction = 0.25;

inline std::vector<std::uint64_t> geometric_schedule(std::uint64_t n0, double ratio,
                                                     std::uint64_t n_max,
                                                     bool include_endpoint = false) {
  if (n0 == 0) throw std::invalid_argument("geometric_schedule: n0 must be >= 1");
  if (!(ratio > 1.0)) throw std::invalid_argument("geometric_schedule: ratio must exceed 1");
  if (n_max < n0) throw std::invalid_argument("geometric_schedule: n_max must be >= n0");
  std::vector<std::uint64_t> out;
  double target = static_cast<double>(n0);
  std::uint64_t prev = 0;
  while (true) {
    std::uint64_t n = static_cast<std::uint64_t>(std::ceil(target));
    if (n <= prev) n = prev + 1;  // keep the schedule strictly increasing
    if (n > n_max) break;
    out.push_back(n);
    prev = n;
    target *= ratio;
  }
  if (include_endpoint && (out.empty() || out.back() != n_max)) out.push_back(n_max);
  return out;
}

}  // namespace ergodic
