#pragma once

// Empirical measures along orbit windows under arithmetic and logarithmic
// weighting, the weak* test-family metric rho, exact circle Wasserstein-1,
// pushforward defects, Hausdorff distance between finite measure sets, and
// V-set estimation by clustering along an evaluation schedule.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergodic/averaging.hpp"
#include "ergodic/numeric.hpp"
#include "ergodic/systems.hpp"

namespace ergodic {

enum class MeasureScheme { Arithmetic, Logarithmic };

inline const char* scheme_name(MeasureScheme s) {
  return s == MeasureScheme::Arithmetic ? "arithmetic" : "logarithmic";
}

// Finitely supported probability measure on an orbit window (m, n]:
// atoms at T^m x .. T^{n-1} x with weights
//   arithmetic:   1/(n-m) each,
//   logarithmic:  1/((k-m) H_{n-m}) for the k-th atom, k = m+1..n.
// Atoms are materialized up to kAtomCap points; beyond that integrals stream
// over the orbit without storing it.
class EmpiricalMeasure {
 public:
  static constexpr std::uint64_t kAtomCap = 100000;

  EmpiricalMeasure(SystemSpec sys, PointRef start, std::uint64_t m, std::uint64_t n,
                   MeasureScheme scheme)
      : sys_(std::move(sys)), start_(std::move(start)), m_(m), n_(n), scheme_(scheme) {
    if (!(m < n)) throw std::invalid_argument("EmpiricalMeasure: window requires m < n");
    if (n - m <= kAtomCap) {
      atoms_.reserve(static_cast<std::size_t>(n - m));
      for_each_atom_streaming([this](const PointRef& p, double w) { atoms_.emplace_back(p, w); });
    }
  }

  const SystemSpec& system() const noexcept { return sys_; }
  const PointRef& start() const noexcept { return start_; }
  std::uint64_t window_begin() const noexcept { return m_; }
  std::uint64_t window_end() const noexcept { return n_; }
  std::uint64_t support_size() const noexcept { return n_ - m_; }
  MeasureScheme scheme() const noexcept { return scheme_; }
  bool materialized() const noexcept { return !atoms_.empty(); }

  const std::vector<std::pair<PointRef, double>>& atoms() const {
    if (atoms_.empty())
      throw std::logic_error("EmpiricalMeasure: atoms not materialized for this window size");
    return atoms_;
  }

  // Visit (point, weight) pairs in orbit order.
  template <typename Fn>
  void for_each_atom(Fn&& fn) const {
    if (!atoms_.empty()) {
      for (const auto& [p, w] : atoms_) fn(p, w);
      return;
    }
    for_each_atom_streaming(std::forward<Fn>(fn));
  }

  // Integral of an observable PointRef -> double against this measure.
  template <typename Fn>
  double integrate(Fn&& f) const {
    CompensatedSum acc;
    for_each_atom([&](const PointRef& p, double w) { acc.add(w * f(p)); });
    return acc.value();
  }

 private:
  template <typename Fn>
  void for_each_atom_streaming(Fn&& fn) const {
    const std::uint64_t len = n_ - m_;
    const double hn = scheme_ == MeasureScheme::Logarithmic ? harmonic(len) : 0.0;
    PointRef cur = advance(sys_, start_, m_);
    for (std::uint64_t j = 1; j <= len; ++j) {
      const double w = scheme_ == MeasureScheme::Arithmetic
                           ? 1.0 / static_cast<double>(len)
                           : 1.0 / (static_cast<double>(j) * hn);
      fn(cur, w);
      if (j < len) cur = step(sys_, cur);
    }
  }

  SystemSpec sys_;
  PointRef start_;
  std::uint64_t m_;
  std::uint64_t n_;
  MeasureScheme scheme_;
  std::vector<std::pair<PointRef, double>> atoms_;
};

inline EmpiricalMeasure empirical(const SystemSpec& sys, const PointRef& x, std::uint64_t m,
                                  std::uint64_t n, MeasureScheme scheme) {
  return EmpiricalMeasure(sys, x, m, n, scheme);
}

// Probe family inducing the test functions f_j(x) = d(x, p_j), j = 1..J.
// Each f_j is 1-Lipschitz with sup norm <= 1 because diameters are <= 1.
// Probes are deterministic: equispaced points j/(J+1) on circle systems,
// canonical periodic words (enumerated by period, then lexicographically) on
// shift spaces, componentwise pairs on products. The induced rho is treated
// as a compatible pseudometric adequate at test tolerances; density of the
// family's span is not certified.
class TestFamily {
 public:
  static constexpr int kDefaultDepth = 16;

  static TestFamily for_system(const SystemSpec& sys, int depth = kDefaultDepth) {
    if (depth < 1 || depth > 62)
      throw std::invalid_argument("TestFamily: depth must lie in [1, 62]");
    TestFamily fam;
    fam.sys_ = sys;
    fam.probes_.reserve(static_cast<std::size_t>(depth));
    switch (sys.kind()) {
      case SystemKind::CircleRotation:
      case SystemKind::DoublingMap:
        for (int j = 1; j <= depth; ++j)
          fam.probes_.push_back(sys.point_at(static_cast<double>(j) / (depth + 1.0)));
        break;
      case SystemKind::BinaryShift:
        for (const std::string& w : canonical_words(depth))
          fam.probes_.push_back(PointRef::shift(SymbolSource::periodic(w), 0));
        break;
      case SystemKind::ProductSystem: {
        TestFamily lf = for_system(sys.left(), depth);
        TestFamily rf = for_system(sys.right(), depth);
        for (int j = 0; j < depth; ++j)
          fam.probes_.push_back(PointRef::product(lf.probes_[j], rf.probes_[j]));
        break;
      }
    }
    return fam;
  }

  int depth() const noexcept { return static_cast<int>(probes_.size()); }
  const SystemSpec& system() const noexcept { return sys_; }
  const std::vector<PointRef>& probes() const noexcept { return probes_; }

  // Contribution of the discarded tail: sum_{j>J} 2^{-j} * 2 ||f||_inf.
  double truncation_bound() const noexcept { return std::ldexp(1.0, 1 - depth()); }

  // f_j(x), 1-based j.
  double evaluate(int j, const PointRef& x) const {
    if (j < 1 || j > depth()) throw std::out_of_range("TestFamily::evaluate: probe index");
    return distance(sys_, x, probes_[static_cast<std::size_t>(j - 1)]);
  }

 private:
  TestFamily() = default;

  // All binary words ordered by period then lexicographically:
  // 0, 1, 00, 01, 10, 11, 000, ...
  static std::vector<std::string> canonical_words(int count) {
    std::vector<std::string> words;
    for (int period = 1; static_cast<int>(words.size()) < count; ++period) {
      for (std::uint64_t w = 0; w < (1ull << period); ++w) {
        std::string s(static_cast<std::size_t>(period), '0');
        for (int b = 0; b < period; ++b)
          if ((w >> (period - 1 - b)) & 1ull) s[static_cast<std::size_t>(b)] = '1';
        words.push_back(std::move(s));
        if (static_cast<int>(words.size()) == count) break;
      }
    }
    return words;
  }

  SystemSpec sys_ = SystemSpec::doubling();
  std::vector<PointRef> probes_;
};

// Integrals of every test function against mu, in one pass over the atoms.
inline std::vector<double> family_integrals(const EmpiricalMeasure& mu, const TestFamily& family) {
  const int depth = family.depth();
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(depth));
  mu.for_each_atom([&](const PointRef& p, double w) {
    for (int j = 0; j < depth; ++j)
      acc[static_cast<std::size_t>(j)].add(w * distance(family.system(), p, family.probes()[static_cast<std::size_t>(j)]));
  });
  std::vector<double> out(static_cast<std::size_t>(depth));
  for (int j = 0; j < depth; ++j) out[static_cast<std::size_t>(j)] = acc[static_cast<std::size_t>(j)].value();
  return out;
}

// rho distance given precomputed family integrals.
inline double rho_from_integrals(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("rho_from_integrals: depth mismatch");
  CompensatedSum acc;
  for (std::size_t j = 0; j < a.size(); ++j)
    acc.add(std::ldexp(std::abs(a[j] - b[j]), -static_cast<int>(j) - 1));
  return acc.value();
}

// rho(mu, nu) = sum_{j<=J} 2^{-j} |int f_j dmu - int f_j dnu|. The truncation
// error of the discarded tail is bounded by family.truncation_bound().
inline double rho(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                  const TestFamily& family) {
  return rho_from_integrals(family_integrals(mu, family), family_integrals(nu, family));
}

// Exact Wasserstein-1 between two measures on the same circle system, via the
// CDF-shift formula W1 = min_t int |F_mu - F_nu - t|; the minimizer is a
// weighted median of the CDF difference. Returned in unscaled arc length
// (multiply by metric_scale() to compare against rho).
inline double circle_w1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (!mu.system().is_circle() || !nu.system().is_circle())
    throw std::invalid_argument("circle_w1: defined only on circle systems");
  std::vector<std::pair<double, double>> events;  // (position, signed weight)
  events.reserve(static_cast<std::size_t>(mu.support_size() + nu.support_size()));
  mu.for_each_atom([&](const PointRef& p, double w) {
    events.emplace_back(point_value(mu.system(), p), w);
  });
  nu.for_each_atom([&](const PointRef& p, double w) {
    events.emplace_back(point_value(nu.system(), p), -w);
  });
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Piecewise-constant F = F_mu - F_nu on the segments between atom positions,
  // including the wrap-around segment.
  std::vector<std::pair<double, double>> segments;  // (F value, segment length)
  segments.reserve(events.size() + 1);
  double f_run = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    f_run += events[i].second;
    const double begin = events[i].first;
    const double end = (i + 1 < events.size()) ? events[i + 1].first : events[0].first + 1.0;
    if (end > begin) segments.emplace_back(f_run, end - begin);
  }

  std::sort(segments.begin(), segments.end());
  double total = 0.0;
  for (const auto& [f, len] : segments) total += len;
  double cum = 0.0;
  double median = segments.back().first;
  for (const auto& [f, len] : segments) {
    cum += len;
    if (cum >= 0.5 * total) {
      median = f;
      break;
    }
  }

  CompensatedSum w1;
  for (const auto& [f, len] : segments) w1.add(len * std::abs(f - median));
  return w1.value();
}

// Invariance defect sum_j 2^{-j} |int f_j dmu - int f_j o T dmu|. Telescoping
// bounds it by 2/n for arithmetic windows (0,n) and 3/H_n for logarithmic
// ones.
inline double pushforward_defect(const SystemSpec& sys, const EmpiricalMeasure& mu,
                                 const TestFamily& family) {
  const int depth = family.depth();
  std::vector<CompensatedSum> diff(static_cast<std::size_t>(depth));
  mu.for_each_atom([&](const PointRef& p, double w) {
    const PointRef tp = step(sys, p);
    for (int j = 0; j < depth; ++j) {
      const auto& probe = family.probes()[static_cast<std::size_t>(j)];
      diff[static_cast<std::size_t>(j)].add(w * (distance(sys, p, probe) - distance(sys, tp, probe)));
    }
  });
  CompensatedSum acc;
  for (int j = 0; j < depth; ++j)
    acc.add(std::ldexp(std::abs(diff[static_cast<std::size_t>(j)].value()), -j - 1));
  return acc.value();
}

// A finite set of separated representative measures.
struct MeasureSet {
  std::vector<EmpiricalMeasure> members;
  double cluster_tol = 0.0;
};

// Standard finite-set Hausdorff distance under rho.
inline double hausdorff(const MeasureSet& a, const MeasureSet& b, const TestFamily& family) {
  if (a.members.empty() || b.members.empty())
    throw std::invalid_argument("hausdorff: sets must be nonempty");
  auto integrals = [&](const MeasureSet& s) {
    std::vector<std::vector<double>> out;
    out.reserve(s.members.size());
    for (const auto& m : s.members) out.push_back(family_integrals(m, family));
    return out;
  };
  const auto ia = integrals(a);
  const auto ib = integrals(b);
  auto directed = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& f : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& t : to) best = std::min(best, rho_from_integrals(f, t));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(ia, ib), directed(ib, ia));
}

// Finite-n proxy for the V-sets: empirical measures over windows (0, n) for n
// in the trailing part of the schedule, greedily clustered under rho.
// First-fit in schedule order with ties toward the earlier representative
// keeps the output deterministic; representatives end up pairwise >= tol
// apart. Any finite schedule can miss accumulation points, so the result is
// an estimate, not the V-set itself.
inline MeasureSet vset_estimate(const SystemSpec& sys, const PointRef& x,
                                const std::vector<std::uint64_t>& schedule, MeasureScheme scheme,
                                double cluster_tol, const TestFamily& family,
                                double window_fraction = kDefaultWindowFraction) {
  if (schedule.empty()) throw std::invalid_argument("vset_estimate: empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1])
      throw std::invalid_argument("vset_estimate: schedule must be strictly increasing");
  }
  if (!(cluster_tol > 0.0)) throw std::invalid_argument("vset_estimate: cluster_tol must be > 0");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw std::invalid_argument("vset_estimate: window_fraction must lie in (0,1]");

  const std::size_t len = schedule.size();
  const std::size_t window =
      std::min(len, static_cast<std::size_t>(
                        std::ceil(window_fraction * static_cast<double>(len))));

  MeasureSet out;
  out.cluster_tol = cluster_tol;
  std::vector<std::vector<double>> rep_integrals;
  for (std::size_t i = len - window; i < len; ++i) {
    EmpiricalMeasure mu = empirical(sys, x, 0, schedule[i], scheme);
    std::vector<double> ints = family_integrals(mu, family);
    bool assigned = false;
    for (const auto& rep : rep_integrals) {
      if (rho_from_integrals(ints, rep) < cluster_tol) {
        assigned = true;
        break;
      }
    }
    if (!assigned) {
      rep_integrals.push_back(std::move(ints));
      out.members.push_back(std::move(mu));
    }
  }
  return out;
}

}  // namespace ergodic
