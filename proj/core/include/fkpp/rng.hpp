#pragma once

#include <cstdint>
#include <random>

namespace fkpp {

using Rng = std::mt19937_64;

/// Independent generator for work item `index` under a global `seed`.
/// Streams depend only on (seed, index), never on scheduling.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

}  // namespace fkpp
