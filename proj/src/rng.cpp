#include "iel/rng.hpp"

#include <stdexcept>

namespace iel {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(mix64(seed ^ mix64(stream_id ^ 0xD1B54A32D192ED03ULL))) {}

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("RngStream::below needs a positive bound");
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % bound;
}

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(seed_, mix64(stream_id_ * 0xFF51AFD7ED558CCDULL ^ mix64(index + 0x632BE59BD9B4E019ULL)));
}

}  // namespace iel
