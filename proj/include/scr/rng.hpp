#pragma once

#include <cstdint>

namespace scr {

/// xoshiro256** generator with explicit floating-point transforms.
///
/// The standard <random> distributions are not required to produce the same
/// stream on every standard library, so everything that feeds reproducible
/// experiments (dataset generation, index draws, baseline sampling) goes
/// through this class instead.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; the spare deviate is cached.
  double normal();

  /// Unbiased integer in [0, n), n >= 1. Rejection-sampled.
  uint64_t bounded(uint64_t n);

  /// Independent generator derived from this one's seed and a stream id.
  /// Streams with distinct ids never share state.
  Rng substream(uint64_t stream_id) const;

 private:
  uint64_t state_[4];
  uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scr
