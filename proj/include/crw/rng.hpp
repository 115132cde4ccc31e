#ifndef CRW_RNG_HPP
#define CRW_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace crw {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// Every random number used by the simulator is a pure function of
/// (seed, slot, stream, index), so a run does not depend on the order in
/// which cells or slots are evaluated. The algorithm is pinned: changing it
/// changes every regression value and bundled CSV.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    ctr = round(ctr, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Stream identifiers. The high byte names the purpose, the low bits an
/// index such as the queue or activity number.
enum class StreamKind : std::uint32_t {
  Arrival = 0x01,
  Service = 0x02,
  Sampling = 0x03,
};

constexpr std::uint32_t stream_id(StreamKind kind, std::uint32_t index) {
  return (static_cast<std::uint32_t>(kind) << 24) | (index & 0x00FFFFFFu);
}

/// Seeded view over Philox: uniform(slot, stream, k) is the k-th uniform of
/// the given stream at the given slot.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  constexpr Philox4x32::Counter block(std::uint64_t slot, std::uint32_t stream,
                                      std::uint32_t block_index) const {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(slot),
                                  static_cast<std::uint32_t>(slot >> 32), stream, block_index};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                              static_cast<std::uint32_t>(seed_ >> 32)};
    return Philox4x32::generate(ctr, key);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t slot, std::uint32_t stream, std::uint32_t k = 0) const {
    const auto words = block(slot, stream, k / 2);
    const std::uint32_t hi = words[2 * (k % 2)];
    const std::uint32_t lo = words[2 * (k % 2) + 1];
    const std::uint64_t bits = (std::uint64_t{hi >> 5} << 26) | (lo >> 6);
    return static_cast<double>(bits) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
};

inline bool bernoulli_draw(double p, double u) { return u < p; }

/// Poisson variate by sequential inversion of one uniform. Rates in this
/// library are packets per slot, so the search is short.
inline std::int64_t poisson_draw(double rate, double u) {
  if (rate <= 0.0) return 0;
  double p = std::exp(-rate);
  double cdf = p;
  std::int64_t k = 0;
  while (u >= cdf && k < 100000) {
    ++k;
    p *= rate / static_cast<double>(k);
    if (p == 0.0) break;
    cdf += p;
  }
  return k;
}

}  // namespace crw

#endif  // CRW_RNG_HPP
