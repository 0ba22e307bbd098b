#pragma once

// Concrete compact metric dynamical systems: circle rotations, the doubling
// map, binary shift spaces over deterministic symbol sources, and finite
// products. Metrics are rescaled so every space has diameter <= 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ergodic/averaging.hpp"
#include "ergodic/numeric.hpp"

namespace ergodic {

// ---------------------------------------------------------------------------
// Symbol sources: deterministic one-sided 0/1 sequences.
// ---------------------------------------------------------------------------

enum class SourceKind { Constant, Periodic, Sturmian, BlockSequence, Explicit };

// What an Explicit source emits beyond its finite word.
enum class WordExtension { FillZero, FillOne, Cycle };

class SymbolSource {
 public:
  static SymbolSource constant(int symbol) {
    if (symbol != 0 && symbol != 1)
      throw std::invalid_argument("SymbolSource::constant: symbol must be 0 or 1");
    auto d = std::make_shared<Data>();
    d->kind = SourceKind::Constant;
    d->symbol = symbol;
    return SymbolSource(std::move(d));
  }

  static SymbolSource periodic(std::string word) {
    check_word(word, "SymbolSource::periodic");
    auto d = std::make_shared<Data>();
    d->kind = SourceKind::Periodic;
    d->word = std::move(word);
    return SymbolSource(std::move(d));
  }

  // s_k = floor((k+1) a + x0) - floor(k a + x0), evaluated through an accurate
  // frac(k a) so that indices up to 10^6 stay on the right side of the floor.
  static SymbolSource sturmian(double alpha, double x0) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("SymbolSource::sturmian: alpha must lie in (0,1)");
    auto d = std::make_shared<Data>();
    d->kind = SourceKind::Sturmian;
    d->alpha = alpha;
    d->x0 = frac(x0);
    return SymbolSource(std::move(d));
  }

  // Block j >= 0 has length ceil(base^j) and constant symbol j mod 2.
  static SymbolSource block_sequence(double growth_base) {
    if (!(growth_base > 1.0))
      throw std::invalid_argument("SymbolSource::block_sequence: growth base must exceed 1");
    auto d = std::make_shared<Data>();
    d->kind = SourceKind::BlockSequence;
    d->base = growth_base;
    // Cumulative block ends, precomputed far past any reachable index.
    double len = 1.0;
    std::uint64_t cum = 0;
    while (cum < (1ull << 62)) {
      if (d->block_ends.size() >= 2000000)
        throw std::invalid_argument("SymbolSource::block_sequence: growth base too close to 1");
      cum += static_cast<std::uint64_t>(std::ceil(len));
      d->block_ends.push_back(cum);
      len *= growth_base;
    }
    return SymbolSource(std::move(d));
  }

  static SymbolSource explicit_word(std::string word, WordExtension extension) {
    check_word(word, "SymbolSource::explicit_word");
    auto d = std::make_shared<Data>();
    d->kind = SourceKind::Explicit;
    d->word = std::move(word);
    d->extension = extension;
    return SymbolSource(std::move(d));
  }

  int symbol(std::uint64_t k) const {
    const Data& d = *data_;
    switch (d.kind) {
      case SourceKind::Constant:
        return d.symbol;
      case SourceKind::Periodic:
        return d.word[k % d.word.size()] - '0';
      case SourceKind::Sturmian: {
        // floor((k+1)a + x0) - floor(ka + x0) = 1  iff  frac(ka + x0) >= 1 - a
        const double y = frac(mul_mod1(k, d.alpha) + d.x0);
        return y >= 1.0 - d.alpha ? 1 : 0;
      }
      case SourceKind::BlockSequence: {
        const auto it = std::upper_bound(d.block_ends.begin(), d.block_ends.end(), k);
        const auto j = static_cast<std::uint64_t>(it - d.block_ends.begin());
        return static_cast<int>(j & 1);
      }
      case SourceKind::Explicit:
        if (k < d.word.size()) return d.word[k] - '0';
        switch (d.extension) {
          case WordExtension::FillZero: return 0;
          case WordExtension::FillOne: return 1;
          case WordExtension::Cycle: return d.word[k % d.word.size()] - '0';
        }
    }
    throw std::logic_error("SymbolSource: unreachable");
  }

  SourceKind kind() const noexcept { return data_->kind; }
  int constant_symbol() const { return data_->symbol; }
  const std::string& word() const { return data_->word; }
  double alpha() const { return data_->alpha; }
  double x0() const { return data_->x0; }
  double growth_base() const { return data_->base; }
  WordExtension extension() const { return data_->extension; }

 private:
  struct Data {
    SourceKind kind = SourceKind::Constant;
    int symbol = 0;
    std::string word;
    double alpha = 0.0;
    double x0 = 0.0;
    double base = 2.0;
    WordExtension extension = WordExtension::FillZero;
    std::vector<std::uint64_t> block_ends;
  };

  static void check_word(const std::string& word, const char* who) {
    if (word.empty()) throw std::invalid_argument(std::string(who) + ": word must be nonempty");
    for (char c : word) {
      if (c != '0' && c != '1')
        throw std::invalid_argument(std::string(who) + ": word must be over {0,1}");
    }
  }

  explicit SymbolSource(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  std::shared_ptr<const Data> data_;
};

// ---------------------------------------------------------------------------
// Bit streams: virtual binary expansions for doubling-map points.
//
// The doubling map is the one-sided shift on binary expansions, and a double
// only carries 53 bits, so orbits of literal doubles reach 0 within ~53 steps.
// Points therefore carry their expansion as a deterministic bit stream: either
// the (finite) expansion of an explicit value, or a counter-based random
// stream standing in for a Lebesgue-typical point. Stepping is an exact
// one-bit shift of the 53-bit window, so long orbits stay faithful.
// ---------------------------------------------------------------------------

class BitStream {
 public:
  static BitStream from_value(double x) {
    if (!(x >= 0.0 && x < 1.0))
      throw std::invalid_argument("BitStream::from_value: x must lie in [0,1)");
    BitStream s;
    s.kind_ = Kind::FromValue;
    s.x0_ = x;
    return s;
  }

  static BitStream from_seed(std::uint64_t seed) {
    BitStream s;
    s.kind_ = Kind::FromSeed;
    s.seed_ = seed;
    return s;
  }

  // Same bits as `base` before `prefix_len`, an independent random tail after.
  // Used by pair samplers to construct doubling points at controlled distance.
  static BitStream spliced(const BitStream& base, std::uint64_t prefix_len,
                           std::uint64_t tail_seed) {
    BitStream s = base;
    if (s.splice_at_ != kNoSplice && prefix_len > s.splice_at_) {
      // keep single-level splicing: beyond base's own splice point the base
      // bits are already random, so re-splicing there changes nothing material
      prefix_len = s.splice_at_;
    }
    s.splice_at_ = prefix_len;
    s.tail_seed_ = tail_seed;
    return s;
  }

  int bit(std::uint64_t i) const {
    if (splice_at_ != kNoSplice && i >= splice_at_) {
      return static_cast<int>(
          (splitmix64_mix(tail_seed_ + (i >> 6) * 0x9E3779B97F4A7C15ull) >> (i & 63)) & 1u);
    }
    if (kind_ == Kind::FromSeed) {
      return static_cast<int>(
          (splitmix64_mix(seed_ + (i >> 6) * 0x9E3779B97F4A7C15ull) >> (i & 63)) & 1u);
    }
    // FromValue: read bit i straight out of the significand. With
    // x0 = sf * 2^{e-53}, sf a 53-bit integer, the bit of weight 2^{-(i+1)}
    // is (sf >> (52 - (i + e))) & 1 wherever that shift is in range.
    if (x0_ == 0.0) return 0;
    int e = 0;
    const double f = std::frexp(x0_, &e);  // x0 = f * 2^e, f in [0.5, 1)
    const auto sf = static_cast<std::uint64_t>(std::ldexp(f, 53));
    const std::int64_t t = static_cast<std::int64_t>(i) + 1 + e - 53;
    if (t >= 1) return 0;  // past the end of the expansion
    const std::int64_t shift = -t;
    if (shift > 52) return 0;  // leading zeros before the first significant bit
    return static_cast<int>((sf >> shift) & 1u);
  }

  // The 53-bit window value sum_{i<53} bit(offset+i) 2^{-(i+1)}.
  double window(std::uint64_t offset) const {
    std::uint64_t acc = 0;
    for (int i = 0; i < 53; ++i) acc = (acc << 1) | static_cast<std::uint64_t>(bit(offset + i));
    return static_cast<double>(acc) * 0x1.0p-53;
  }

  bool from_seed_kind() const noexcept { return kind_ == Kind::FromSeed; }
  double value0() const noexcept { return x0_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  enum class Kind { FromValue, FromSeed };
  static constexpr std::uint64_t kNoSplice = ~0ull;

  Kind kind_ = Kind::FromValue;
  double x0_ = 0.0;
  std::uint64_t seed_ = 0;
  std::uint64_t splice_at_ = kNoSplice;
  std::uint64_t tail_seed_ = 0;
};

// ---------------------------------------------------------------------------
// Systems and points.
// ---------------------------------------------------------------------------

enum class SystemKind { CircleRotation, DoublingMap, BinaryShift, ProductSystem };

class SystemSpec;

class PointRef {
 public:
  struct RotationPt {
    double x0;            // starting position in [0,1)
    std::uint64_t steps;  // orbit position is frac(x0 + steps * alpha)
  };
  struct DoublingPt {
    BitStream bits;
    std::uint64_t offset;
    double value;  // cached window(offset)
  };
  struct ShiftPt {
    SymbolSource source;
    std::uint64_t offset;
  };
  struct ProductPt {
    std::shared_ptr<const PointRef> left;
    std::shared_ptr<const PointRef> right;
  };

  static PointRef rotation(double x0, std::uint64_t steps = 0) {
    if (!(x0 >= 0.0 && x0 < 1.0))
      throw std::invalid_argument("PointRef::rotation: position must lie in [0,1)");
    return PointRef(RotationPt{x0, steps});
  }
  static PointRef doubling(BitStream bits, std::uint64_t offset = 0) {
    const double v = bits.window(offset);
    return PointRef(DoublingPt{std::move(bits), offset, v});
  }
  // Internal fast path: caller supplies window(offset), already known exactly.
  static PointRef doubling_at(BitStream bits, std::uint64_t offset, double value) {
    return PointRef(DoublingPt{std::move(bits), offset, value});
  }
  static PointRef shift(SymbolSource source, std::uint64_t offset = 0) {
    return PointRef(ShiftPt{std::move(source), offset});
  }
  static PointRef product(PointRef left, PointRef right) {
    return PointRef(ProductPt{std::make_shared<PointRef>(std::move(left)),
                              std::make_shared<PointRef>(std::move(right))});
  }

  bool is_rotation() const noexcept { return std::holds_alternative<RotationPt>(rep_); }
  bool is_doubling() const noexcept { return std::holds_alternative<DoublingPt>(rep_); }
  bool is_shift() const noexcept { return std::holds_alternative<ShiftPt>(rep_); }
  bool is_product() const noexcept { return std::holds_alternative<ProductPt>(rep_); }

  const RotationPt& as_rotation() const { return get<RotationPt>("rotation"); }
  const DoublingPt& as_doubling() const { return get<DoublingPt>("doubling"); }
  const ShiftPt& as_shift() const { return get<ShiftPt>("shift"); }
  const ProductPt& as_product() const { return get<ProductPt>("product"); }

 private:
  template <typename T>
  const T& get(const char* what) const {
    const T* p = std::get_if<T>(&rep_);
    if (!p) throw std::invalid_argument(std::string("PointRef: not a ") + what + " point");
    return *p;
  }

  template <typename Rep>
  explicit PointRef(Rep rep) : rep_(std::move(rep)) {}

  std::variant<RotationPt, DoublingPt, ShiftPt, ProductPt> rep_;
};

class SystemSpec {
 public:
  static SystemSpec rotation(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("SystemSpec::rotation: alpha must lie in (0,1)");
    SystemSpec s;
    s.kind_ = SystemKind::CircleRotation;
    s.alpha_ = alpha;
    return s;
  }

  static SystemSpec doubling() {
    SystemSpec s;
    s.kind_ = SystemKind::DoublingMap;
    return s;
  }

  static SystemSpec shift(SymbolSource source) {
    SystemSpec s;
    s.kind_ = SystemKind::BinaryShift;
    s.source_ = std::make_shared<SymbolSource>(std::move(source));
    return s;
  }

  static SystemSpec product(SystemSpec left, SystemSpec right) {
    SystemSpec s;
    s.kind_ = SystemKind::ProductSystem;
    s.left_ = std::make_shared<SystemSpec>(std::move(left));
    s.right_ = std::make_shared<SystemSpec>(std::move(right));
    return s;
  }

  SystemKind kind() const noexcept { return kind_; }
  bool is_circle() const noexcept {
    return kind_ == SystemKind::CircleRotation || kind_ == SystemKind::DoublingMap;
  }

  double alpha() const {
    require(SystemKind::CircleRotation, "alpha");
    return alpha_;
  }
  const SymbolSource& source() const {
    require(SystemKind::BinaryShift, "source");
    return *source_;
  }
  const SystemSpec& left() const {
    require(SystemKind::ProductSystem, "left");
    return *left_;
  }
  const SystemSpec& right() const {
    require(SystemKind::ProductSystem, "right");
    return *right_;
  }

  // Scale factor applied to the raw arc metric so the diameter is 1.
  double metric_scale() const noexcept { return is_circle() ? 2.0 : 1.0; }

  // Canonical point constructors.
  PointRef point_at(double x) const {
    switch (kind_) {
      case SystemKind::CircleRotation: return PointRef::rotation(frac(x));
      case SystemKind::DoublingMap: return PointRef::doubling(BitStream::from_value(frac(x)));
      default:
        throw std::invalid_argument("SystemSpec::point_at: system has no circle coordinates");
    }
  }

  PointRef shift_point(std::uint64_t offset = 0) const {
    require(SystemKind::BinaryShift, "shift_point");
    return PointRef::shift(*source_, offset);
  }

  PointRef shift_point(SymbolSource src, std::uint64_t offset = 0) const {
    require(SystemKind::BinaryShift, "shift_point");
    return PointRef::shift(std::move(src), offset);
  }

  PointRef product_point(PointRef l, PointRef r) const {
    require(SystemKind::ProductSystem, "product_point");
    return PointRef::product(std::move(l), std::move(r));
  }

  // Draw from the system's natural measure: Lebesgue for circle systems, a
  // uniformly random shift of the source word for shift systems.
  PointRef random_point(SplitMix64& rng) const {
    switch (kind_) {
      case SystemKind::CircleRotation: return PointRef::rotation(rng.next_unit());
      case SystemKind::DoublingMap: return PointRef::doubling(BitStream::from_seed(rng.next()));
      case SystemKind::BinaryShift: return PointRef::shift(*source_, rng.next() & 0xFFFFFull);
      case SystemKind::ProductSystem: {
        PointRef l = left_->random_point(rng);
        PointRef r = right_->random_point(rng);
        return PointRef::product(std::move(l), std::move(r));
      }
    }
    throw std::logic_error("SystemSpec: unreachable");
  }

 private:
  void require(SystemKind k, const char* what) const {
    if (kind_ != k)
      throw std::invalid_argument(std::string("SystemSpec: ") + what +
                                  " is not available for this system kind");
  }

  SystemKind kind_ = SystemKind::CircleRotation;
  double alpha_ = 0.0;
  std::shared_ptr<const SymbolSource> source_;
  std::shared_ptr<const SystemSpec> left_;
  std::shared_ptr<const SystemSpec> right_;
};

// ---------------------------------------------------------------------------
// Dynamics.
// ---------------------------------------------------------------------------

namespace detail {
inline void check_point(const SystemSpec& sys, const PointRef& p, const char* op) {
  bool ok = false;
  switch (sys.kind()) {
    case SystemKind::CircleRotation: ok = p.is_rotation(); break;
    case SystemKind::DoublingMap: ok = p.is_doubling(); break;
    case SystemKind::BinaryShift: ok = p.is_shift(); break;
    case SystemKind::ProductSystem: ok = p.is_product(); break;
  }
  if (!ok)
    throw std::invalid_argument(std::string(op) + ": point kind does not match system kind");
}

inline double circle_arc(double u, double v) noexcept {
  double a = std::abs(u - v);
  return std::min(a, 1.0 - a);
}
}  // namespace detail

// Position of a circle-system point in [0,1).
inline double point_value(const SystemSpec& sys, const PointRef& p) {
  detail::check_point(sys, p, "point_value");
  switch (sys.kind()) {
    case SystemKind::CircleRotation: {
      const auto& r = p.as_rotation();
      // Exact stepping: recompute frac(x0 + k alpha) from k, so long orbits
      // have no accumulated drift.
      return frac(r.x0 + mul_mod1(r.steps, sys.alpha()));
    }
    case SystemKind::DoublingMap: return p.as_doubling().value;
    default:
      throw std::invalid_argument("point_value: system has no circle coordinates");
  }
}

inline PointRef step(const SystemSpec& sys, const PointRef& p) {
  detail::check_point(sys, p, "step");
  switch (sys.kind()) {
    case SystemKind::CircleRotation: {
      const auto& r = p.as_rotation();
      return PointRef::rotation(r.x0, r.steps + 1);
    }
    case SystemKind::DoublingMap: {
      const auto& d = p.as_doubling();
      // Exact window shift: drop the head bit, append the next expansion bit.
      double v = 2.0 * d.value;
      if (v >= 1.0) v -= 1.0;
      if (d.bits.bit(d.offset + 53)) v += 0x1.0p-53;
      return PointRef::doubling_at(d.bits, d.offset + 1, v);
    }
    case SystemKind::BinaryShift: {
      const auto& s = p.as_shift();
      return PointRef::shift(s.source, s.offset + 1);
    }
    case SystemKind::ProductSystem: {
      const auto& pr = p.as_product();
      return PointRef::product(step(sys.left(), *pr.left), step(sys.right(), *pr.right));
    }
  }
  throw std::logic_error("step: unreachable");
}

// T^k p without iterating k times where a direct jump is available.
inline PointRef advance(const SystemSpec& sys, const PointRef& p, std::uint64_t k) {
  detail::check_point(sys, p, "advance");
  switch (sys.kind()) {
    case SystemKind::CircleRotation: {
      const auto& r = p.as_rotation();
      return PointRef::rotation(r.x0, r.steps + k);
    }
    case SystemKind::DoublingMap: {
      const auto& d = p.as_doubling();
      return PointRef::doubling(d.bits, d.offset + k);
    }
    case SystemKind::BinaryShift: {
      const auto& s = p.as_shift();
      return PointRef::shift(s.source, s.offset + k);
    }
    case SystemKind::ProductSystem: {
      const auto& pr = p.as_product();
      return PointRef::product(advance(sys.left(), *pr.left, k),
                               advance(sys.right(), *pr.right, k));
    }
  }
  throw std::logic_error("advance: unreachable");
}

// The rescaled metric. Circle systems: 2 * arc distance (diameter 1). Shift
// spaces: 2^{-j} at the first disagreeing index j, with anything below 2^{-64}
// treated as 0. Products: max of the component distances.
inline double distance(const SystemSpec& sys, const PointRef& p, const PointRef& q) {
  detail::check_point(sys, p, "distance");
  detail::check_point(sys, q, "distance");
  switch (sys.kind()) {
    case SystemKind::CircleRotation:
    case SystemKind::DoublingMap:
      return 2.0 * detail::circle_arc(point_value(sys, p), point_value(sys, q));
    case SystemKind::BinaryShift: {
      const auto& a = p.as_shift();
      const auto& b = q.as_shift();
      for (int j = 0; j < 64; ++j) {
        if (a.source.symbol(a.offset + j) != b.source.symbol(b.offset + j))
          return std::ldexp(1.0, -j);
      }
      return 0.0;
    }
    case SystemKind::ProductSystem: {
      const auto& pa = p.as_product();
      const auto& pb = q.as_product();
      return std::max(distance(sys.left(), *pa.left, *pb.left),
                      distance(sys.right(), *pa.right, *pb.right));
    }
  }
  throw std::logic_error("distance: unreachable");
}

// (T^m p, ..., T^{n-1} p), length n - m.
inline std::vector<PointRef> orbit_segment(const SystemSpec& sys, const PointRef& p,
                                           std::uint64_t m, std::uint64_t n) {
  if (!(m < n)) throw std::out_of_range("orbit_segment: requires m < n");
  std::vector<PointRef> out;
  out.reserve(static_cast<std::size_t>(n - m));
  PointRef cur = advance(sys, p, m);
  for (std::uint64_t k = m; k < n; ++k) {
    out.push_back(cur);
    if (k + 1 < n) cur = step(sys, cur);
  }
  return out;
}

// Trace of d(T^{k-1} p, T^{k-1} q) for k = 1..n; bound 1.
inline RealTrace pair_distance_trace(const SystemSpec& sys, PointRef p, PointRef q,
                                     std::size_t n) {
  if (n == 0) throw std::invalid_argument("pair_distance_trace: n must be >= 1");
  std::vector<double> vals;
  vals.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    vals.push_back(distance(sys, p, q));
    if (k + 1 < n) {
      p = step(sys, p);
      q = step(sys, q);
    }
  }
  return RealTrace(std::move(vals), 1.0);
}

// Head symbol of a shift point: the standard 1-Lipschitz observable on shift
// spaces (|head(x) - head(y)| <= d(x,y) because disagreeing heads force d = 1).
inline int head_symbol(const SystemSpec& sys, const PointRef& p) {
  detail::check_point(sys, p, "head_symbol");
  if (sys.kind() != SystemKind::BinaryShift)
    throw std::invalid_argument("head_symbol: only defined on shift systems");
  const auto& s = p.as_shift();
  return s.source.symbol(s.offset);
}

}  // namespace ergodic
