#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

// Counter-derived random streams. Every consumer derives its own stream from
// (seed, tag, i, j), so results are a pure function of the seed no matter how
// work is partitioned across threads. Distributions are implemented here
// rather than taken from <random> because libstdc++/libc++ do not promise
// identical sequences, and golden outputs must not depend on the standard
// library build.

namespace spinbath {

constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden64;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// xoshiro256++ seeded through splitmix64.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t tag = 0, std::uint64_t i = 0,
         std::uint64_t j = 0) {
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ splitmix64(tag ^ 0xA076'1D64'78BD'642Full));
    k = splitmix64(k ^ splitmix64(i ^ 0xE703'7ED1'A0B4'28DBull));
    k = splitmix64(k ^ splitmix64(j ^ 0x8EBC'6AF0'9C88'C6E3ull));
    for (auto& s : state_) {
      k += kGolden64;
      s = splitmix64(k);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // strictly positive uniform, safe under log()
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // fair +1/-1
  int sign() { return (next_u64() >> 63) ? 1 : -1; }

  double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Poisson: product inversion for small mean, Hormann's PTRS transformed
  // rejection for large mean. Bounded loops, platform-stable.
  std::uint64_t poisson(double lambda) {
    if (lambda < 0.0 || !std::isfinite(lambda))
      throw std::invalid_argument("poisson: lambda must be finite and >= 0");
    if (lambda == 0.0) return 0;
    if (lambda < 12.0) {
      const double limit = std::exp(-lambda);
      std::uint64_t k = 0;
      double prod = uniform();
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      return k;
    }
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (int iter = 0; iter < 10000; ++iter) {
      double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          kf * loglam - lambda - std::lgamma(kf + 1.0))
        return static_cast<std::uint64_t>(kf);
    }
    throw std::runtime_error("poisson: rejection sampler failed to accept");
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

}  // namespace spinbath
