#pragma once

#include <cstdint>

namespace qhed {

/// SplitMix64 (Steele, Lea & Flood 2014). The full algorithm is:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// Doubles in [0, 1) take the top 53 bits: (next() >> 11) * 2^-53.
/// Both steps are pure integer arithmetic, so fixtures recorded with this
/// generator are portable across compilers and platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Deterministic seed for a sub-task: one SplitMix64 step over the parent
/// seed combined with each key in order.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key) {
  SplitMix64 g(parent ^ (key * 0xD1B54A32D192ED03ULL));
  return g.next();
}

template <typename... Keys>
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key, Keys... rest) {
  return derive_seed(derive_seed(parent, key), static_cast<std::uint64_t>(rest)...);
}

}  // namespace qhed
