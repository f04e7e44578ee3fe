#pragma once

// Portable, seed-reproducible random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. Distributions are implemented here because the std:: ones are
// implementation-defined. Substreams are keyed by (seed, stream id) through
// SplitMix64, so generation can be split by index without shared state.

#include <cstdint>
#include <random>

namespace rise {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, bound), bound > 0, rejection-sampled.
  std::uint64_t below(std::uint64_t bound);
  // Standard normal via Box–Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rise
