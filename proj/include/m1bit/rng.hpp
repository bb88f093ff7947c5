// Seeded random streams with bit-portable output.
//
// std::mt19937_64 is fully specified by the standard, but the distribution
// adaptors in <random> are not, so the uniform/normal draws are derived from
// raw 64-bit words here. Stream layout (seed -> draw sequence) is frozen by
// the test fixtures.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace m1bit {

/// One step of the splitmix64 generator; used to decorrelate stream tags.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Named substreams of a master seed. Distinct tags give independent streams.
enum class StreamTag : std::uint64_t {
  signal_support = 1,
  signal_values = 2,
  sensing_matrix = 3,
  noise = 4,
  generic = 5,
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamTag tag)
      : RandomStream(seed, static_cast<std::uint64_t>(tag)) {}

  RandomStream(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ull * (tag + 1));
    // Two splitmix steps to spread low-entropy seeds before seeding MT.
    splitmix64(s);
    gen_.seed(splitmix64(s));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; caches the second draw of each pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Unbiased uniform integer in [0, bound) via rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t q = UINT64_MAX / bound;
    const std::uint64_t limit = q * bound;
    std::uint64_t r;
    do {
      r = gen_();
    } while (r >= limit);
    return r % bound;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace m1bit
