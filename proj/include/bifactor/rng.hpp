// Seeded random streams for reproducible experiments.
//
// Stream derivation: the (seed, stream) pair is mixed by splitmix64 into a
// single mt19937_64 seed, so trial t of an experiment draws from
// RngStream(seed, t) and parallel / serial execution see identical values.
// Uniforms take the top 53 bits of the generator output; normals come from
// the Box-Muller transform with a cached spare. The identity string below
// is recorded in every CSV produced by the benchmark harness.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bifactor {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

class RngStream {
 public:
  static constexpr const char* kIdentity = "mt19937_64+boxmuller/v1";

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % n;
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bifactor
