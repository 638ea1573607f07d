#pragma once

#include <cstdint>
#include <optional>

#include "fcarab/types.hpp"

namespace fcarab {

/// Counter-based random stream.
///
/// Output i of a stream with key K is splitmix64_mix(K + (i + 1) * 0x9E3779B97F4A7C15),
/// so every draw is a pure function of (key, counter). Child streams are
/// keyed by derive(parent_key, stream_id); the harness uses
///   trial key    = derive(derive(seed, 0x7472), trial_index)
///   error draws  = derive(trial key, 1)
///   snapshots    = derive(trial key, 2)
/// and generate_snapshots() splits its seed into derive(seed, 1 + source_index)
/// for waveforms and derive(seed, 0) for noise.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z);
  static std::uint64_t derive(std::uint64_t parent, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  /// Circular complex Gaussian with E|z|^2 = variance.
  cplx circular_normal(double variance = 1.0);

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_;
};

}  // namespace fcarab
