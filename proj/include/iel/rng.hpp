#pragma once

#include <cstdint>
#include <limits>

namespace iel {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream.
///
/// A stream is keyed by (seed, stream_id):
///   key     = mix64(seed ^ mix64(stream_id ^ 0xD1B54A32D192ED03))
///   value_i = mix64(key + i * 0x9E3779B97F4A7C15),  i = 1, 2, ...
/// Uniform doubles take the top 53 bits: (value >> 11) * 2^-53.
///
/// The i-th draw depends only on (seed, stream_id, i), so sequences are bit-identical on every
/// platform; the period of a stream is 2^64. Substreams are derived with `split`, which
/// hashes a child index into a fresh stream id. A stream must be advanced by one worker only.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t position() const { return counter_; }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }
  std::uint64_t operator()() { return next_u64(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return std::numeric_limits<std::uint64_t>::max(); }

  /// Uniform on [0, 1).
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }
  /// Uniform integer in [0, bound); bound must be positive. Unbiased (rejection).
  std::uint64_t below(std::uint64_t bound);

  /// Independent child stream; `index` selects the child.
  RngStream split(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Free-function form of RngStream::next_uniform.
inline double rng_next_uniform(RngStream& s) { return s.next_uniform(); }

}  // namespace iel
