#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>

namespace qmix {

/// SplitMix64 (Steele, Lea & Flood 2014), version 1 constants.
///
/// Streams are derived from (seed, stream index), so trial i of a simulation
/// draws the same numbers regardless of how trials are scheduled. Conversion
/// to doubles is done here rather than through <random> distributions, whose
/// output is implementation-defined.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  static constexpr const char* kAlgorithm = "splitmix64-v1";

  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1).
  double uniform_open() {
    double u;
    do u = uniform();
    while (u == 0.0);
    return u;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

/// Uniform point on the (m-1)-simplex from the spacings of sorted uniforms.
inline Eigen::VectorXd sample_flat_simplex(int m, SplitMix64& rng) {
  Eigen::VectorXd cuts(m + 1);
  cuts(0) = 0.0;
  cuts(m) = 1.0;
  for (int i = 1; i < m; ++i) cuts(i) = rng.uniform();
  std::sort(cuts.data() + 1, cuts.data() + m);
  Eigen::VectorXd w(m);
  for (int i = 0; i < m; ++i) w(i) = cuts(i + 1) - cuts(i);
  // Spacings sum to 1 up to one rounding per entry; put the residue on the
  // largest entry so the vector sums to 1 within a few ulps.
  Eigen::Index arg;
  w.maxCoeff(&arg);
  w(arg) += 1.0 - w.sum();
  return w;
}

}  // namespace qmix
