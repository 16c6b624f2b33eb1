#pragma once

#include <cstdint>

namespace armpg {

/// Seedable deterministic random stream (PCG32, XSH-RR output function).
///
/// A stream is identified by (seed, stream_id). The same pair reproduces the
/// identical draw sequence on every platform; distinct stream_ids select
/// distinct LCG orbits and are treated as statistically independent. Streams
/// are single-owner: move them between contexts, never share one concurrently.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), state_(0), inc_((stream_id << 1u) | 1u) {
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double strictly inside (0,1): 53 random bits offset by half an
  /// ulp of 2^-53, so 0, 1 and the midpoint 0.5 are never returned exactly.
  double uniform01() {
    const std::uint64_t r = next_u64() >> 11;
    return (static_cast<double>(r) + 0.5) * 0x1.0p-53;
  }

  /// Uniform double in (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// Independent child stream, reproducibly derived from this stream's
  /// identity and `key`. Advancing the child never touches the parent, so
  /// parallel workers can each own substream(worker_index).
  RngStream substream(std::uint64_t key) const { return {seed_, mix(stream_id_, key)}; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined identifiers
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  std::uint64_t inc_;
};

}  // namespace armpg
