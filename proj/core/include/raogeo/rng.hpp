#pragma once

#include <cstdint>

namespace raogeo {

/// xoshiro256** with SplitMix64 seeding.
///
/// Streams are addressed by (seed, index) so that replicate `r` of an
/// experiment can be generated on any thread and reproduce the same draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream);

  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(seed, stream);
  }

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace raogeo
