#pragma once

#include <cstdint>
#include <random>

namespace fidelity {

using Engine = std::mt19937_64;

/// Independent engine for one Monte Carlo sample. The stream depends only on
/// (seed, stream_tag, index), so results do not depend on how samples are
/// distributed over workers.
inline Engine sample_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t stream_tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_tag), static_cast<std::uint32_t>(stream_tag >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

inline double uniform01(Engine& eng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

inline double normal(Engine& eng, double mean, double stddev) {
  return std::normal_distribution<double>(mean, stddev)(eng);
}

}  // namespace fidelity
