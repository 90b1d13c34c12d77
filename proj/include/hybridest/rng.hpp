#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace hybridest {

// Stream tags. Every random draw in a simulation comes from a stream named by
// (master seed, stream index, tag), so results do not depend on evaluation
// order or worker count.
namespace purpose {
inline constexpr std::uint64_t channel = 0x6368616eULL;
inline constexpr std::uint64_t noise = 0x6e6f6973ULL;
inline constexpr std::uint64_t covest_channel = 0x63766368ULL;
inline constexpr std::uint64_t covest_noise = 0x63766e6fULL;
inline constexpr std::uint64_t dft_rows = 0x64667472ULL;
inline constexpr std::uint64_t ray_angles = 0x72617961ULL;
inline constexpr std::uint64_t init_unitary = 0x696e6974ULL;

/// Per-user sub-tag for multi-user simulations.
inline constexpr std::uint64_t user(std::uint64_t tag, int k) {
  return tag ^ (static_cast<std::uint64_t>(k + 1) << 32);
}
}  // namespace purpose

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seedable, splittable random stream. mt19937_64 is fully specified by the
/// standard and the transforms below avoid the implementation-defined
/// std::*_distribution classes, so output is identical across toolchains.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t tag)
      : engine_(splitmix64(splitmix64(splitmix64(master_seed) ^ stream) ^ tag)) {}

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal N(0, 1), Box-Muller with the second value cached.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * M_PI * u2);
    has_cached_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  /// Circularly-symmetric complex normal CN(0, 1).
  std::complex<double> cgaussian() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));  // variance 1/2 per component
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

  Eigen::VectorXcd cgaussian_vector(Eigen::Index n) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cgaussian();
    return v;
  }

  /// Uniform integer on [0, bound), bias-free by rejection.
  std::uint64_t next_index(std::uint64_t bound) {
    const std::uint64_t threshold = -bound % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace hybridest
