#pragma once

#include <optional>
#include <vector>

#include "fcarab/acp.hpp"
#include "fcarab/coupling.hpp"
#include "fcarab/signals.hpp"

namespace fcarab {

/// Closed angular interval sampled uniformly. With one sample the point is
/// the interval centre; otherwise both end points are included.
struct AngularSector {
  double lo_deg = 0.0;
  double hi_deg = 0.0;
  int samples = 1;

  /// Samples spaced by `step_deg` from lo to hi (hi rounded onto the grid).
  static AngularSector with_step(double lo_deg, double hi_deg, double step_deg);

  double length() const { return hi_deg - lo_deg; }
  std::vector<double> points() const;
  /// Quadrature weight per sample: length / samples, or 1 for a zero-length
  /// sector so that a single direction contributes its Capon power as is.
  double weight() const;
};

/// Discretization of the interference region over angle x ACP box.
struct SamplingGrid {
  std::vector<AngularSector> sectors;  // one per interferer
  int r1_samples = 5;
  int r2_samples = 5;
  double varpi = 0.0;  // steering-vector sphere radius; recorded, not enforced

  void validate() const;
};

/// Sectors [theta - half_width, theta + half_width] around each presumed
/// interferer direction, clipped to [-90, 90].
SamplingGrid interference_grid(const std::vector<double>& interferer_deg, double half_width_deg,
                               double step_deg, int r1_samples = 5, int r2_samples = 5);

/// [-90, theta - half_width] and [theta + half_width, 90], skipping empty pieces.
std::vector<AngularSector> complement_sectors(double soi_deg, double half_width_deg,
                                              double step_deg);

/// Capon spectrum term C a a^H C^H / (a^H C^H R^-1 C a) summed over the
/// joint angle x ACP grid, plus noise * I:
///
///   noise I + (4 l1 l2)/(S_r1 S_r2) sum_q (L_q/S_q) sum_{r1,r2,theta} term.
///
/// ACP samples cover [r_bar - l, r_bar + l] including end points. A zero
/// bound pins that radius at r_bar and replaces its 2l factor by 1, so that
/// l1 = l2 = 0 degenerates to the angle-only sum. Only presumed ACP fields
/// of `acp` are read. Angles are in degrees and lengths in millimetres.
CovMatrix reconstruct_multidomain(const CovMatrix& r_sample, const CouplingMatrix& coupling,
                                  const SamplingGrid& grid, const NominalGeometry& geom,
                                  const ACPState& acp, double noise_power);

/// Angle-only reconstruction at fixed radii over `sectors`, each sample
/// weighted by AngularSector::weight(). Adds noise * I when given.
CovMatrix reconstruct_angular(const CovMatrix& r_sample, const CouplingMatrix& coupling,
                              const std::vector<AngularSector>& sectors,
                              const NominalGeometry& geom, double r1, double r2,
                              std::optional<double> noise_power = std::nullopt);

}  // namespace fcarab
