#include "fcarab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fcarab {

double output_sinr(const ComplexVector& w, const CovMatrix& true_incm,
                   const ComplexVector& true_sv, double signal_power) {
  if (w.size() != true_sv.size() || true_incm.size() != w.size()) {
    throw DomainError("output_sinr: dimension mismatch");
  }
  const double denom = w.dot(true_incm.value * w).real();
  if (!(denom > 0.0)) return -std::numeric_limits<double>::infinity();
  const double num = signal_power * std::norm(w.dot(true_sv));
  return 10.0 * std::log10(num / denom);
}

double output_sinr(const BeamformerWeights& w, const CovMatrix& true_incm,
                   const ComplexVector& true_sv, double signal_power) {
  return output_sinr(w.w, true_incm, true_sv, signal_power);
}

std::vector<double> angle_grid(double lo_deg, double hi_deg, double step_deg) {
  if (!(step_deg > 0.0) || !(hi_deg >= lo_deg)) throw DomainError("invalid angle grid");
  const int n = static_cast<int>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(lo_deg + i * step_deg);
  return out;
}

std::vector<PatternPoint> beampattern(const ComplexVector& w, const NominalGeometry& geom,
                                      const ComplexMatrix& coupling, double r1, double r2,
                                      const std::vector<double>& angles) {
  if (angles.empty()) throw DomainError("beampattern: empty angle grid");
  std::vector<PatternPoint> out;
  out.reserve(angles.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (double th : angles) {
    const ComplexVector v = coupling * steering_vector(geom, th, r1, r2).entries;
    const double p = 20.0 * std::log10(std::abs(w.dot(v)));
    out.push_back({th, p});
    peak = std::max(peak, p);
  }
  if (std::isfinite(peak)) {
    for (auto& pt : out) pt.power_db -= peak;
  }
  return out;
}

}  // namespace fcarab
