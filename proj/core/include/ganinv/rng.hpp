#pragma once

#include <cstdint>
#include <random>

namespace ganinv {

using Rng = std::mt19937_64;

/// Tags that keep the random streams of one trial independent of each
/// other and of the order in which trials run.
enum class StreamPurpose : std::uint64_t {
  weights = 1,
  latent = 2,
  init = 3,
  noise = 4,
  clip = 5,
  baseline = 6,
};

/// Deterministic stream keyed by (seed, index, purpose, salt). Distinct keys
/// give statistically independent engines.
Rng derive_stream(std::uint64_t seed, std::uint64_t index,
                  StreamPurpose purpose, std::uint64_t salt = 0);

/// Uniform draw on [-1, 1].
double uniform_symmetric(Rng& rng);

}  // namespace ganinv
