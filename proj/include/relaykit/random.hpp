#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace relaykit {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for a (parent, tag...) path. Stable across runs and platforms.
inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(parent);
  for (auto t : tags) s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

/// mt19937_64 with the handful of draws the library needs. Uniform draws use the
/// top 53 bits directly so they do not depend on the standard library's distributions.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    if (n <= 1) return 0;
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t v;
    do v = eng_();
    while (v >= limit);
    return v % n;
  }

  double normal() {
    std::normal_distribution<double> nd(0.0, 1.0);
    return nd(eng_);
  }

  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
};

}  // namespace relaykit
