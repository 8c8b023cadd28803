#include "iptvq/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace iptvq {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed;
  const std::uint64_t base = splitmix64(state);
  state = base ^ (index * 0xd1b54a32d192ed03ULL);
  return splitmix64(state);
}

double Rng::exponential(double rate) {
  if (!(rate > 0)) return std::numeric_limits<double>::infinity();
  return -std::log1p(-uniform()) / rate;
}

double Rng::angle() { return 2 * std::numbers::pi * uniform(); }

}  // namespace iptvq
