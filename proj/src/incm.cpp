#include "fcarab/incm.hpp"

#include <algorithm>
#include <cmath>

#include "fcarab/linalg.hpp"

namespace fcarab {

AngularSector AngularSector::with_step(double lo_deg, double hi_deg, double step_deg) {
  if (!(step_deg > 0.0)) throw DomainError("sector step must be positive");
  if (!(hi_deg >= lo_deg)) throw DomainError("sector upper bound below lower bound");
  const int n = static_cast<int>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
  if (n == 1) return {lo_deg, lo_deg, 1};
  return {lo_deg, lo_deg + (n - 1) * step_deg, n};
}

std::vector<double> AngularSector::points() const {
  std::vector<double> out;
  if (samples < 1) return out;
  if (samples == 1) {
    out.push_back(0.5 * (lo_deg + hi_deg));
    return out;
  }
  out.reserve(static_cast<std::size_t>(samples));
  const double step = length() / (samples - 1);
  for (int i = 0; i < samples; ++i) out.push_back(lo_deg + i * step);
  out.back() = hi_deg;
  return out;
}

double AngularSector::weight() const {
  return length() > 0.0 ? length() / samples : 1.0;
}

void SamplingGrid::validate() const {
  if (sectors.empty()) throw DomainError("sampling grid has no interference sectors");
  if (r1_samples < 1 || r2_samples < 1) throw DomainError("ACP sample counts must be >= 1");
  for (const auto& s : sectors) {
    if (s.samples < 1) throw DomainError("sector sample count must be >= 1");
    if (!(s.lo_deg >= -90.0 && s.hi_deg <= 90.0 && s.lo_deg <= s.hi_deg)) {
      throw DomainError("sector outside [-90, 90] degrees");
    }
  }
}

SamplingGrid interference_grid(const std::vector<double>& interferer_deg, double half_width_deg,
                               double step_deg, int r1_samples, int r2_samples) {
  SamplingGrid grid;
  grid.r1_samples = r1_samples;
  grid.r2_samples = r2_samples;
  for (double theta : interferer_deg) {
    const double lo = std::max(-90.0, theta - half_width_deg);
    const double hi = std::min(90.0, theta + half_width_deg);
    grid.sectors.push_back(AngularSector::with_step(lo, hi, step_deg));
  }
  return grid;
}

std::vector<AngularSector> complement_sectors(double soi_deg, double half_width_deg,
                                              double step_deg) {
  std::vector<AngularSector> out;
  const double left = soi_deg - half_width_deg;
  const double right = soi_deg + half_width_deg;
  if (left > -90.0) out.push_back(AngularSector::with_step(-90.0, left, step_deg));
  if (right < 90.0) out.push_back(AngularSector::with_step(right, 90.0, step_deg));
  return out;
}

namespace {

std::vector<double> acp_samples(double centre, double bound, int count) {
  std::vector<double> out;
  if (bound <= 0.0 || count == 1) {
    out.assign(static_cast<std::size_t>(count), centre);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out.push_back(centre - bound + 2.0 * bound * i / (count - 1));
  }
  return out;
}

// Adds weight * v v^H / (v^H Rinv v) for v = C a(theta, r1, r2).
void add_capon_term(ComplexMatrix& acc, const ComplexMatrix& coupling, const ComplexMatrix& r_inv,
                    const ProjectedBasis& basis, double k, double r1, double r2, double weight) {
  const Eigen::Index s = basis.mu.size();
  ComplexVector a(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const double phase = k * (r1 * basis.mu[i] + r2 * basis.nu[i]);
    a[i] = {std::cos(phase), std::sin(phase)};
  }
  const ComplexVector v = coupling * a;
  const double denom = v.dot(r_inv * v).real();
  if (!(denom > 0.0)) throw NumericalError("Capon spectrum denominator is not positive");
  acc.noalias() += (weight / denom) * v * v.adjoint();
}

void check_inputs(const CovMatrix& r, const CouplingMatrix& c, const NominalGeometry& geom) {
  if (r.size() != geom.size() || r.value.cols() != geom.size()) {
    throw DomainError("covariance dimension does not match the array");
  }
  if (c.size() != geom.size()) throw DomainError("coupling dimension does not match the array");
}

}  // namespace

CovMatrix reconstruct_multidomain(const CovMatrix& r_sample, const CouplingMatrix& coupling,
                                  const SamplingGrid& grid, const NominalGeometry& geom,
                                  const ACPState& acp, double noise_power) {
  grid.validate();
  check_inputs(r_sample, coupling, geom);
  if (!(noise_power > 0.0)) {
    throw NumericalError("noise power estimate must be positive to regularize R^-1");
  }
  const ComplexMatrix r_inv = hermitian_inverse(r_sample.value, noise_power);
  const Eigen::Index s = geom.size();

  const double f1 = (acp.l1 > 0.0 ? 2.0 * acp.l1 : 1.0) / grid.r1_samples;
  const double f2 = (acp.l2 > 0.0 ? 2.0 * acp.l2 : 1.0) / grid.r2_samples;
  const auto r1s = acp_samples(acp.r1_bar, acp.l1, grid.r1_samples);
  const auto r2s = acp_samples(acp.r2_bar, acp.l2, grid.r2_samples);

  ComplexMatrix acc = ComplexMatrix::Zero(s, s);
  for (const auto& sector : grid.sectors) {
    const double w = f1 * f2 * sector.weight();
    std::vector<ProjectedBasis> bases;
    for (double theta : sector.points()) bases.push_back(projected_basis(geom, theta));
    for (double r1 : r1s) {
      for (double r2 : r2s) {
        for (const auto& basis : bases) {
          add_capon_term(acc, coupling.entries, r_inv, basis, geom.wavenumber, r1, r2, w);
        }
      }
    }
  }
  acc.diagonal().array() += noise_power;
  return {hermitian_part(acc), CovKind::reconstructed};
}

CovMatrix reconstruct_angular(const CovMatrix& r_sample, const CouplingMatrix& coupling,
                              const std::vector<AngularSector>& sectors,
                              const NominalGeometry& geom, double r1, double r2,
                              std::optional<double> noise_power) {
  if (sectors.empty()) throw DomainError("angular reconstruction needs a nonempty sector");
  check_inputs(r_sample, coupling, geom);
  const double floor = noise_power.value_or(noise_power_estimate(r_sample));
  const ComplexMatrix r_inv = hermitian_inverse(r_sample.value, floor);
  const Eigen::Index s = geom.size();
  ComplexMatrix acc = ComplexMatrix::Zero(s, s);
  for (const auto& sector : sectors) {
    if (sector.samples < 1) throw DomainError("sector sample count must be >= 1");
    const double w = sector.weight();
    for (double theta : sector.points()) {
      add_capon_term(acc, coupling.entries, r_inv, projected_basis(geom, theta),
                     geom.wavenumber, r1, r2, w);
    }
  }
  if (noise_power) acc.diagonal().array() += *noise_power;
  return {hermitian_part(acc), CovKind::reconstructed};
}

}  // namespace fcarab
