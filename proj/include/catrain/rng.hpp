#pragma once
// Deterministic RNG with named substreams. Every random decision in the
// library draws from a stream derived from (seed, tag, indices...), so a
// single run seed reproduces bit-identical runs and paired experiments
// stay seed-aligned.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace catrain::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over the tag string.
inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class... Ix>
inline std::uint64_t derive(std::uint64_t seed, std::string_view tag, Ix... ix) {
  std::uint64_t s = seed ^ hash_tag(tag);
  std::uint64_t h = splitmix64(s);
  ((s = h ^ static_cast<std::uint64_t>(ix), h = splitmix64(s)), ...);
  return h;
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64(state_); }

  // [0,1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // (0,1], safe as a log argument
  double uniform01_pos() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; one draw per call keeps streams position-independent.
  double normal() {
    constexpr double two_pi = 6.283185307179586;
    double u1 = uniform01_pos();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

 private:
  std::uint64_t state_;
};

template <class... Ix>
inline Stream stream(std::uint64_t seed, std::string_view tag, Ix... ix) {
  return Stream(derive(seed, tag, ix...));
}

}  // namespace catrain::rng
