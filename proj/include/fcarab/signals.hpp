#pragma once

#include <cstdint>
#include <vector>

#include "fcarab/coupling.hpp"
#include "fcarab/geometry.hpp"

namespace fcarab {

struct Source {
  double theta_deg = 0.0;     // true direction
  double presumed_deg = 0.0;  // what the beamformer is told
  double power = 1.0;         // linear, relative to unit noise
};

/// Index 0 is the signal of interest, the rest are interferers.
struct SourceSet {
  std::vector<Source> sources;

  void validate() const;
  const Source& soi() const { return sources.front(); }
  std::size_t size() const { return sources.size(); }
};

/// True state of the array and the wavefield for one realization.
struct SignalModel {
  NominalGeometry geometry;
  double r1_mm = 0.0;  // true radii
  double r2_mm = 0.0;
  ComplexMatrix coupling;  // true MCM, S x S
  SourceSet sources;       // true directions and powers
  double noise_power = 1.0;
  int snapshots = 1;

  void validate() const;
  /// Effective steering vector C a(theta_j, r1, r2) of source j.
  ComplexVector effective_sv(std::size_t j) const;
};

struct SnapshotBlock {
  ComplexMatrix data;  // S x K, one snapshot per column
  std::uint64_t seed = 0;

  Eigen::Index snapshots() const { return data.cols(); }
};

enum class CovKind { sample, true_incm, reconstructed };

struct CovMatrix {
  ComplexMatrix value;
  CovKind kind = CovKind::sample;

  Eigen::Index size() const { return value.rows(); }
};

/// x(k) = sum_j C a(theta_j) s_j(k) + n(k) with circular Gaussian waveforms
/// and noise. Bit-reproducible from (model, seed); waveforms are drawn with
/// unit variance and scaled, so the same seed at a different power yields
/// the same underlying samples.
SnapshotBlock generate_snapshots(const SignalModel& model, std::uint64_t seed);

/// (1/K) sum_k x(k) x(k)^H, symmetrized.
CovMatrix sample_covariance(const SnapshotBlock& block);

/// sum_{j>=1} p_j (C a_j)(C a_j)^H + noise I at the true state.
CovMatrix true_incm(const SignalModel& model);

/// Smallest eigenvalue of R, floored at 1e-12 trace(R) / S.
double noise_power_estimate(const CovMatrix& r);

}  // namespace fcarab
