#pragma once

#include <cstdint>
#include <random>

namespace reflpos {

/// Purpose tags keep independent consumers of one seed on disjoint substreams.
enum class StreamTag : std::uint32_t {
  field_sample = 1,
  test_functions = 2,
  factorized_outer = 3,
  bootstrap = 4,
  convolution_check = 5,
  property = 6,
};

/// Engine for substream (seed, tag, block). Deterministic across runs and thread counts.
inline std::mt19937_64 substream(std::uint64_t seed, StreamTag tag, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(block),
                    static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace reflpos
