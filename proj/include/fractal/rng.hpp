#pragma once

#include <cstdint>
#include <vector>

namespace fractal {

/// Splittable counter-based generator. A stream is identified by a 64-bit key
/// derived from the global seed and the path of child indices that produced it;
/// draws hash (key, counter). Child streams are independent by construction and
/// never share state with the parent.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : key_(mix(seed ^ kRoot)) {}

  /// Derives the child stream for branch index `i` without advancing *this.
  SplitRng child(std::uint64_t i) const { return SplitRng(key_, i); }

  std::uint64_t next() { return hash(key_, counter_++); }

  /// Unbiased draw from {0, ..., n-1} by rejection.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Draw in [0, 1) with 53 random bits.
  double uniform_real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  SplitRng(std::uint64_t parent_key, std::uint64_t branch)
      : key_(hash(parent_key, mix(branch ^ kChild))) {}

  static constexpr std::uint64_t kRoot = 0x9e3779b97f4a7c15ull;
  static constexpr std::uint64_t kChild = 0xbf58476d1ce4e5b9ull;

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t hash(std::uint64_t key, std::uint64_t ctr) {
    return mix(key + 0x632be59bd9b4e019ull * (ctr + 1));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline std::uint64_t SplitRng::uniform_int(std::uint64_t n) {
  if (n <= 1) return 0;
  std::uint64_t limit = ~0ull - (~0ull % n);
  for (;;) {
    std::uint64_t v = next();
    if (v < limit) return v % n;
  }
}

}  // namespace fractal
