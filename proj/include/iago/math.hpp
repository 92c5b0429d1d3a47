#pragma once

#include <cstdint>

namespace iago {

inline constexpr double kPi = 3.14159265358979323846;

/// Standard normal density.
double normal_pdf(double u);

/// Standard normal cumulative distribution function.
double normal_cdf(double u);

/// Inverse of the standard normal CDF, p in (0,1).
double normal_quantile(double p);

/// 64-bit finalizing mixer (splitmix64 output function).
std::uint64_t mix64(std::uint64_t z);

/// Derives an independent stream key from a seed and a stream index.
std::uint64_t substream_key(std::uint64_t seed, std::uint64_t stream);

/// Counter-based random stream: the state advances by a fixed increment and
/// each output is a pure function of the state, so streams derived from
/// (seed, index) reproduce bit-for-bit regardless of evaluation order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : state_(key) {}
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : state_(substream_key(seed, stream)) {}

  std::uint64_t next_u64();

  /// Uniform draw strictly inside (0,1).
  double next_unit();

  /// Standard normal draw (inverse-CDF transform, fully portable).
  double next_normal();

  /// Uniform integer in [0, n), n >= 1.
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

/// Total standard-normal draws made by any RandomStream since process start.
/// Used by tests to assert that an operation performs no fresh sampling.
std::uint64_t normal_draw_count();

}  // namespace iago
