#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace acrl {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Named sub-streams. Every random draw in the system comes from a seed derived
// as derive_seed(base, stream, index...), so any scope can be replayed without
// serializing generator state.
enum class Stream : std::uint64_t {
  Init = 1,
  Probe = 2,
  Collect = 3,
  Shuffle = 4,
  Eval = 5,
  Opponent = 6,
  Episode = 7,
  Duel = 8,
  Export = 9,
};

template <class... Tags>
std::uint64_t derive_seed(std::uint64_t base, Tags... tags) {
  ((base = mix_seed(base, static_cast<std::uint64_t>(tags))), ...);
  return base;
}

// mt19937_64 engine with fixed, stateless draw functions on top. The standard
// distributions are implementation-defined and keep internal state, either of
// which would break bit-reproducible resume.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // [0, n); n must be > 0 and small against 2^64, modulo bias is negligible
  std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(bits() % n); }

  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace acrl
