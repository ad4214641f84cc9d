#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fusion {

// Stream tags for derive_seed; every stochastic consumer draws from its own
// substream so evaluation order never changes results.
enum class Stream : std::uint64_t {
  kInit = 1,
  kUpdate = 2,
  kNoise = 3,
  kRandomBaseline = 4,
  kImage = 5,
  kRobustness = 6,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p));
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream s, std::uint64_t a = 0,
                                    std::uint64_t b = 0) {
  return derive_seed(master, {static_cast<std::uint64_t>(s), a, b});
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fusion
