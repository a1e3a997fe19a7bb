#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <vector>

namespace fatigue {

// Deterministic PRNG used everywhere seeds matter. xoshiro256** seeded via
// splitmix64, with explicit distribution code so results do not depend on
// the standard library implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
    have_gauss_ = false;
    gauss_ = 0.0;
  }

  // Stable child-stream derivation: hash the root seed with a tag path.
  // Used to give every (subject, fold, channel, ...) its own stream.
  static uint64_t derive(uint64_t root, std::initializer_list<uint64_t> path) {
    uint64_t x = root;
    (void)splitmix64(x);
    for (uint64_t t : path) {
      x ^= t + 0x9e3779b97f4a7c15ULL;
      (void)splitmix64(x);
    }
    return splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection-free modulo bias is negligible for
  // our n (<< 2^32) but use Lemire-style rejection anyway.
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) return 0;
    uint64_t x, r;
    do {
      x = next_u64();
      r = x % n;
    } while (x - r > uint64_t(0) - n);
    return r;
  }

  // Standard normal via Box-Muller (cached pair).
  double gaussian() {
    if (have_gauss_) {
      have_gauss_ = false;
      return gauss_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    gauss_ = r * std::sin(a);
    have_gauss_ = true;
    return r * std::cos(a);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  // Zero-mean unit-variance uniform white sample. Much cheaper than
  // gaussian(); fine wherever only second-order statistics matter.
  double white() { return (uniform() - 0.5) * 3.4641016151377543864; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t s_[4];
  bool have_gauss_;
  double gauss_;
};

}  // namespace fatigue
