#pragma once

// Numeric building blocks shared across the library: compensated summation,
// a small deterministic RNG, and accurate mod-1 products for long orbits.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ergodic {

// Neumaier-compensated accumulator. Long averages (up to 10^6 terms) must
// keep >= 10 significant digits, which plain left-to-right summation does
// not guarantee.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  double value() const noexcept { return sum_ + comp_; }

  void reset() noexcept { sum_ = comp_ = 0.0; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// SplitMix64 mixing function (Steele, Lea, Flood).
inline std::uint64_t splitmix64_mix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Small sequential RNG. We roll our own because std::uniform_real_distribution
// is implementation-defined and experiment outputs must be reproducible
// byte-for-byte.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  // Decorrelated stream for a (master seed, stream index) pair. Workers and
  // per-sample draws are seeded this way so results do not depend on how work
  // is partitioned over threads.
  static SplitMix64 for_stream(std::uint64_t master_seed, std::uint64_t stream) noexcept {
    return SplitMix64(splitmix64_mix(master_seed ^ (0x9E3779B97F4A7C15ull * (stream + 1))));
  }

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random bits.
  double next_unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Fractional part in [0, 1).
inline double frac(double x) noexcept {
  double r = x - std::floor(x);
  if (r >= 1.0) r -= 1.0;  // x just below an integer can round up
  if (r < 0.0) r += 1.0;
  return r;
}

// frac(k * alpha) with the product carried in double-double precision.
// Naive k*alpha loses ~ulp(k*alpha) absolutely, which at k ~ 10^5 already
// exceeds 1e-12; the two-product split keeps the reduction near 1 ulp of the
// result.
inline double mul_mod1(std::uint64_t k, double alpha) noexcept {
  const double kd = static_cast<double>(k);
  const double hi = kd * alpha;
  const double lo = std::fma(kd, alpha, -hi);
  double r = (hi - std::floor(hi)) + lo;
  r -= std::floor(r);
  if (r >= 1.0) r -= 1.0;
  if (r < 0.0) r += 1.0;
  return r;
}

// Linear-interpolation quantile of an already sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile_sorted: q outside [0,1]");
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[lo + 1] * w;
}

}  // namespace ergodic
