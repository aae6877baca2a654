#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace risaoi {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// 64-bit finalizer used to derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Separate randomness lanes so that two runs with the same master seed see
// identical arrivals/channels regardless of how many draws a policy consumes.
enum class Lane : std::uint64_t {
  geometry = 0x11,
  arrivals = 0x22,
  channels = 0x33,
  randomization = 0x44,
  generic = 0x77,
};

// Deterministic random stream. Every distribution is synthesized from raw
// mt19937_64 output with a fixed algorithm, so sequences do not depend on the
// standard library's distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream derive(std::uint64_t master, Lane lane, std::uint64_t index = 0) {
    const std::uint64_t s =
        splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(lane)) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
    return RandomStream(s);
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; the second sample of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return radius * std::cos(kTwoPi * u2);
  }

  // Circularly-symmetric complex Gaussian, zero mean, E|z|^2 = 1.
  std::complex<double> cscg() {
    const double inv_sqrt2 = 0.70710678118654752440;
    const double re = normal();
    const double im = normal();
    return {re * inv_sqrt2, im * inv_sqrt2};
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace risaoi
