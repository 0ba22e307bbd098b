#pragma once

// Mobius function sieve and Sarnak-type Mobius-weighted orbit sums.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ergodic/averaging.hpp"
#include "ergodic/numeric.hpp"

namespace ergodic {

// mu(1..N) by a linear sieve. Entry [0] is unused; [k] = mu(k).
inline std::vector<int> mobius_sieve(std::size_t n_max) {
  if (n_max == 0) throw std::invalid_argument("mobius_sieve: N must be >= 1");
  std::vector<int> mu(n_max + 1, 0);
  std::vector<std::uint32_t> primes;
  std::vector<bool> composite(n_max + 1, false);
  mu[1] = 1;
  for (std::size_t i = 2; i <= n_max; ++i) {
    if (!composite[i]) {
      primes.push_back(static_cast<std::uint32_t>(i));
      mu[i] = -1;
    }
    for (std::uint32_t p : primes) {
      const std::size_t ip = i * p;
      if (ip > n_max) break;
      composite[ip] = true;
      if (i % p == 0) {
        mu[ip] = 0;  // p^2 divides ip
        break;
      }
      mu[ip] = -mu[i];
    }
  }
  return mu;
}

// Mobius-weighted orbit sums. The trace holds f(T^k x) at 1-based index k.
//   Cesaro form:       (1/N)     sum_{k<=N} f(T^k x) mu(k)
//   logarithmic form:  (1/log N) sum_{k<=N} (1/k) f(T^k x) mu(k)
// The logarithmic normalization is log N; pass harmonic_normalization to
// divide by H_N instead (the two differ by o(1) but outputs are bit-specified).
inline double sarnak_sum(const RealTrace& trace, std::size_t n, bool logarithmic,
                         bool harmonic_normalization = false) {
  if (n == 0) throw std::invalid_argument("sarnak_sum: N must be >= 1");
  if (n > trace.size()) throw std::out_of_range("sarnak_sum: N exceeds trace length");
  if (logarithmic && n < 2 && !harmonic_normalization)
    throw std::invalid_argument("sarnak_sum: logarithmic form requires N >= 2");
  const std::vector<int> mu = mobius_sieve(n);
  const auto vals = trace.values();
  CompensatedSum acc;
  if (logarithmic) {
    for (std::size_t k = 1; k <= n; ++k) {
      if (mu[k] == 0) continue;
      acc.add(static_cast<double>(mu[k]) * vals[k - 1] / static_cast<double>(k));
    }
    const double norm = harmonic_normalization ? harmonic(n) : std::log(static_cast<double>(n));
    return acc.value() / norm;
  }
  for (std::size_t k = 1; k <= n; ++k) {
    if (mu[k] == 0) continue;
    acc.add(static_cast<double>(mu[k]) * vals[k - 1]);
  }
  return acc.value() / static_cast<double>(n);
}

}  // namespace ergodic
