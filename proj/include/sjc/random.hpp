#pragma once

// Counter-based random numbers: every draw is a pure function of (seed, index),
// so results do not depend on how work is split across threads.

#include <cstdint>
#include <limits>

namespace sjc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `index` of `seed`.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform double in the open interval (0, 1) at position (seed, index).
inline constexpr double uniform_at(std::uint64_t seed, std::uint64_t index) noexcept {
  const std::uint64_t bits = derive_seed(seed, index) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// UniformRandomBitGenerator over a (key, counter) pair.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) noexcept : key_(splitmix64(seed)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return derive_seed(key_, counter_++); }

  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sjc
