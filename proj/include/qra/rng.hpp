#pragma once

#include <cstdint>
#include <initializer_list>

namespace qra {

// All randomness in a run flows from one 64-bit seed. Logical units of work
// (a marginal, a coefficient, a repetition, ...) get their own stream keyed by
// a path of integers, so results do not depend on thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_key(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = seed;
  std::uint64_t k = splitmix64(s);
  for (std::uint64_t c : path) {
    s = k ^ (c + 0x9E3779B97F4A7C15ULL);
    k = splitmix64(s);
  }
  return k;
}

// xoshiro256** seeded through splitmix64.
class Stream {
 public:
  explicit Stream(std::uint64_t key) {
    std::uint64_t s = key;
    for (auto& w : s_) w = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

} // namespace qra
