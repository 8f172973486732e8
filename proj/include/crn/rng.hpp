#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace crn {

// splitmix64: used only to derive decorrelated substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seedable, portable stream of doubles on top of std::mt19937_64 (the engine
// is fully specified by the standard; the distributions below are hand-rolled
// because the standard library ones are implementation-defined).
//
// Substream rule: stream k of master seed s is seeded with
//   splitmix64(s ^ (0x9E3779B97F4A7C15 * (k + 1))).
// Scenario generation uses stream i for SU i and stream K for the channel-
// independent sensing draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t master_seed, std::uint64_t stream) {
    return Rng(splitmix64(master_seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1))));
  }

  // uniform on [0, 1): 53 high bits of the engine output.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Rayleigh via inverse CDF; 1 - uniform01() avoids log(0).
  double rayleigh(double sigma) {
    return sigma * std::sqrt(-2.0 * std::log(1.0 - uniform01()));
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace crn
