#pragma once

#include <vector>

#include "fcarab/types.hpp"

namespace fcarab {

/// Two tangent circular arcs. Ring 1 holds elements s = -1..-M on a circle of
/// radius r1 centred at the origin; ring 2 holds s = 1..N on a circle of
/// radius r2 touching ring 1 at (0, r1). Canonical element order is
/// s = -M, ..., -1, 1, ..., N. Lengths are millimetres.
struct NominalGeometry {
  int ring1_elements = 0;
  int ring2_elements = 0;
  double ring1_radius_mm = 0.0;  // R1, fixes the ring-1 central angles
  double ring2_radius_mm = 0.0;  // R2, fixes the ring-2 central angles
  double wavelength_mm = 0.0;
  double wavenumber = 0.0;  // rad/mm

  static NominalGeometry create(int ring1_elements, int ring2_elements, double ring1_radius_mm,
                                double ring2_radius_mm, double wavelength_mm);
  static NominalGeometry at_carrier(int ring1_elements, int ring2_elements,
                                    double ring1_radius_mm, double ring2_radius_mm,
                                    double carrier_hz = 5e9);

  void validate() const;

  Eigen::Index size() const { return ring1_elements + ring2_elements; }
  /// Element label s for canonical index i.
  int label(Eigen::Index i) const;
  bool on_ring1(Eigen::Index i) const { return i < ring1_elements; }
  /// beta_s = s * lambda / (2 R), always from the nominal radii.
  double central_angle(Eigen::Index i) const;
};

/// Positions are linear in the radii: p_s(r1, r2) = r1 * mu_s + r2 * nu_s.
/// Columns follow the canonical element order.
struct ElementBasis {
  Eigen::Matrix2Xd mu;
  Eigen::Matrix2Xd nu;
};

ElementBasis element_basis(const NominalGeometry& geom);

/// Planar element positions in millimetres. Throws DomainError for r <= 0.
std::vector<Eigen::Vector2d> element_positions(const NominalGeometry& geom, double r1, double r2);

/// Smallest arc length between neighbouring elements, including the pair
/// that straddles the ring junction.
double min_geodesic_spacing(const NominalGeometry& geom, double r1, double r2);

struct SteeringVector {
  ComplexVector entries;
  double theta_deg = 0.0;
  double r1_mm = 0.0;
  double r2_mm = 0.0;
};

struct DeviationVector {
  ComplexVector entries;
  double x_mm = 0.0;
  double y_mm = 0.0;
  double theta_deg = 0.0;
};

struct DeviationDerivatives {
  ComplexVector d_x;
  ComplexVector d_y;
};

/// Projections of mu_s and nu_s onto u(theta) = [sin theta, cos theta].
struct ProjectedBasis {
  RealVector mu;
  RealVector nu;
};

ProjectedBasis projected_basis(const NominalGeometry& geom, double theta_deg);

/// a_s = exp(j k p_s(r1, r2) . u(theta)), theta in [-90, 90] degrees.
SteeringVector steering_vector(const NominalGeometry& geom, double theta_deg, double r1,
                               double r2);

/// Same phase law with the radii replaced by the deviations (x, y), so that
/// a(theta, r1_bar + x, r2_bar + y) = a(theta, r1_bar, r2_bar) .* alpha(theta, x, y).
DeviationVector deviation_vector(const NominalGeometry& geom, double theta_deg, double x,
                                 double y);

/// Partial derivatives of alpha in x and y.
DeviationDerivatives deviation_derivatives(const NominalGeometry& geom, double theta_deg,
                                           double x, double y);

}  // namespace fcarab
