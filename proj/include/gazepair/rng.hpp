#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace gazepair {

// xoshiro256** seeded via splitmix64. All sampling helpers are implemented
// here rather than with <random> distributions so that a given seed produces
// the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Unbiased integer in [0, n), n >= 1. Rejection sampling on the top bits.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  // Marsaglia polar method; one spare value cached between calls.
  double normal(double mean, double stddev) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return mean + stddev * u * m;
  }

  // Independent child stream; used to give each trial/participant its own
  // source without correlating consecutive seeds.
  Rng derive(std::uint64_t stream) const {
    std::uint64_t sm = state_[0] ^ (stream + 0x9e3779b97f4a7c15ULL);
    std::uint64_t mixed = splitmix64(sm);
    sm ^= splitmix64(sm) + stream;
    return Rng(mixed ^ splitmix64(sm));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

 private:

  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Stable combination of a master seed and a stream index (trial id,
/// participant index, ...) into a fresh seed.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t x = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  const std::uint64_t a = Rng::splitmix64(x);
  const std::uint64_t b = Rng::splitmix64(x);
  return a ^ Rng::rotl(b, 32);
}

}  // namespace gazepair
