#pragma once

// Seeded random streams for the simulator.  mt19937_64 is fully specified by
// the standard, so draws are identical on every conforming platform.

#include <cstdint>
#include <random>

namespace iptvq {

/// One splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of the independent substream for replication `index`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) from the top 53 bits of one draw.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate by inversion, -log1p(-u) / rate.
  double exponential(double rate);

  /// Uniform angle on [0, 2 pi).
  double angle();

 private:
  std::mt19937_64 engine_;
};

}  // namespace iptvq
