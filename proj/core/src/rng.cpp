#include "ganinv/rng.hpp"

#include <array>

namespace ganinv {

Rng derive_stream(std::uint64_t seed, std::uint64_t index,
                  StreamPurpose purpose, std::uint64_t salt) {
  const auto tag = static_cast<std::uint64_t>(purpose);
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(index), hi(index),
                    lo(tag),  hi(tag),  lo(salt),  hi(salt)};
  return Rng(seq);
}

double uniform_symmetric(Rng& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  return dist(rng);
}

}  // namespace ganinv
