#include "fcarab/geometry.hpp"

#include "fcarab/acp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fcarab {

namespace {

void check_direction(double theta_deg) {
  if (!std::isfinite(theta_deg) || theta_deg < -90.0 || theta_deg > 90.0) {
    throw DomainError("direction must lie in [-90, 90] degrees");
  }
}

ComplexVector phase_vector(double k, const ProjectedBasis& basis, double a, double b) {
  const Eigen::Index s = basis.mu.size();
  ComplexVector out(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const double phase = k * (a * basis.mu[i] + b * basis.nu[i]);
    out[i] = {std::cos(phase), std::sin(phase)};
  }
  return out;
}

}  // namespace

void ACPState::validate() const {
  if (!(l1 >= 0.0) || !(l2 >= 0.0)) throw ConfigError("ACP error bounds must be non-negative");
  if (!(r1_bar > 0.0) || !(r2_bar > 0.0) || !(r1 > 0.0) || !(r2 > 0.0)) {
    throw ConfigError("ring radii must be positive");
  }
  // Small slack so that bounds computed in floating point still admit the end points.
  const double slack = 1e-9;
  if (std::abs(r1 - r1_bar) > l1 * (1 + slack) + slack ||
      std::abs(r2 - r2_bar) > l2 * (1 + slack) + slack) {
    throw ConfigError("true ACPs fall outside the error bounds");
  }
}

NominalGeometry NominalGeometry::create(int ring1_elements, int ring2_elements,
                                        double ring1_radius_mm, double ring2_radius_mm,
                                        double wavelength_mm) {
  NominalGeometry g;
  g.ring1_elements = ring1_elements;
  g.ring2_elements = ring2_elements;
  g.ring1_radius_mm = ring1_radius_mm;
  g.ring2_radius_mm = ring2_radius_mm;
  g.wavelength_mm = wavelength_mm;
  g.wavenumber = 2.0 * kPi / wavelength_mm;
  g.validate();
  return g;
}

NominalGeometry NominalGeometry::at_carrier(int ring1_elements, int ring2_elements,
                                            double ring1_radius_mm, double ring2_radius_mm,
                                            double carrier_hz) {
  if (!(carrier_hz > 0.0)) throw DomainError("carrier frequency must be positive");
  const double wavelength_mm = kSpeedOfLight / carrier_hz * 1e3;
  return create(ring1_elements, ring2_elements, ring1_radius_mm, ring2_radius_mm,
                wavelength_mm);
}

void NominalGeometry::validate() const {
  if (ring1_elements < 1 || ring2_elements < 1) {
    throw DomainError("each ring needs at least one element");
  }
  if (!(ring1_radius_mm > 0.0) || !(ring2_radius_mm > 0.0)) {
    throw DomainError("nominal ring radii must be positive");
  }
  if (!(wavelength_mm > 0.0) || !std::isfinite(wavelength_mm)) {
    throw DomainError("wavelength must be positive and finite");
  }
}

int NominalGeometry::label(Eigen::Index i) const {
  return on_ring1(i) ? static_cast<int>(i) - ring1_elements
                     : static_cast<int>(i) - ring1_elements + 1;
}

double NominalGeometry::central_angle(Eigen::Index i) const {
  const double radius = on_ring1(i) ? ring1_radius_mm : ring2_radius_mm;
  return label(i) * wavelength_mm / (2.0 * radius);
}

ElementBasis element_basis(const NominalGeometry& geom) {
  const Eigen::Index s = geom.size();
  ElementBasis basis{Eigen::Matrix2Xd::Zero(2, s), Eigen::Matrix2Xd::Zero(2, s)};
  for (Eigen::Index i = 0; i < s; ++i) {
    const double beta = geom.central_angle(i);
    if (geom.on_ring1(i)) {
      basis.mu.col(i) << std::sin(beta), std::cos(beta);
    } else {
      basis.mu.col(i) << 0.0, 1.0;
      basis.nu.col(i) << std::sin(beta), std::cos(beta) - 1.0;
    }
  }
  return basis;
}

std::vector<Eigen::Vector2d> element_positions(const NominalGeometry& geom, double r1,
                                               double r2) {
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw DomainError("ring radii must be positive");
  const auto basis = element_basis(geom);
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(geom.size()));
  for (Eigen::Index i = 0; i < geom.size(); ++i) {
    out.emplace_back(r1 * basis.mu.col(i) + r2 * basis.nu.col(i));
  }
  return out;
}

double min_geodesic_spacing(const NominalGeometry& geom, double r1, double r2) {
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw DomainError("ring radii must be positive");
  double spacing = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i + 1 < geom.size(); ++i) {
    const double b0 = geom.central_angle(i);
    const double b1 = geom.central_angle(i + 1);
    double arc;
    if (geom.on_ring1(i) && geom.on_ring1(i + 1)) {
      arc = r1 * std::abs(b1 - b0);
    } else if (!geom.on_ring1(i) && !geom.on_ring1(i + 1)) {
      arc = r2 * std::abs(b1 - b0);
    } else {
      arc = r1 * std::abs(b0) + r2 * std::abs(b1);
    }
    spacing = std::min(spacing, arc);
  }
  return spacing;
}

ProjectedBasis projected_basis(const NominalGeometry& geom, double theta_deg) {
  const double theta = deg_to_rad(theta_deg);
  const Eigen::Vector2d u(std::sin(theta), std::cos(theta));
  const auto basis = element_basis(geom);
  return {basis.mu.transpose() * u, basis.nu.transpose() * u};
}

SteeringVector steering_vector(const NominalGeometry& geom, double theta_deg, double r1,
                               double r2) {
  check_direction(theta_deg);
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw DomainError("ring radii must be positive");
  const auto basis = projected_basis(geom, theta_deg);
  return {phase_vector(geom.wavenumber, basis, r1, r2), theta_deg, r1, r2};
}

DeviationVector deviation_vector(const NominalGeometry& geom, double theta_deg, double x,
                                 double y) {
  check_direction(theta_deg);
  const auto basis = projected_basis(geom, theta_deg);
  return {phase_vector(geom.wavenumber, basis, x, y), x, y, theta_deg};
}

DeviationDerivatives deviation_derivatives(const NominalGeometry& geom, double theta_deg,
                                           double x, double y) {
  check_direction(theta_deg);
  const auto basis = projected_basis(geom, theta_deg);
  const ComplexVector alpha = phase_vector(geom.wavenumber, basis, x, y);
  const cplx jk(0.0, geom.wavenumber);
  DeviationDerivatives d;
  d.d_x = jk * basis.mu.cast<cplx>().cwiseProduct(alpha);
  d.d_y = jk * basis.nu.cast<cplx>().cwiseProduct(alpha);
  return d;
}

}  // namespace fcarab
