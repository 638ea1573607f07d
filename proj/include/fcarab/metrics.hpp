#pragma once

#include <vector>

#include "fcarab/beamformers.hpp"
#include "fcarab/coupling.hpp"
#include "fcarab/geometry.hpp"
#include "fcarab/signals.hpp"

namespace fcarab {

/// 10 log10(p |w^H a|^2 / (w^H R w)). Returns -infinity when the
/// denominator is not positive.
double output_sinr(const BeamformerWeights& w, const CovMatrix& true_incm,
                   const ComplexVector& true_sv, double signal_power);
double output_sinr(const ComplexVector& w, const CovMatrix& true_incm,
                   const ComplexVector& true_sv, double signal_power);

struct PatternPoint {
  double theta_deg;
  double power_db;
};

/// 20 log10 |w^H C a(theta, r1, r2)| over `angles`, shifted so that the
/// maximum is 0 dB. Pass the true radii and true coupling.
std::vector<PatternPoint> beampattern(const ComplexVector& w, const NominalGeometry& geom,
                                      const ComplexMatrix& coupling, double r1, double r2,
                                      const std::vector<double>& angles);

/// lo, lo + step, ... up to hi inclusive (within rounding).
std::vector<double> angle_grid(double lo_deg, double hi_deg, double step_deg);

}  // namespace fcarab
