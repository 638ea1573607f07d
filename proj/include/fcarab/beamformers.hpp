#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fcarab/coupling.hpp"
#include "fcarab/incm.hpp"
#include "fcarab/signals.hpp"
#include "fcarab/svest.hpp"

namespace fcarab {

enum class Method { optimal, proposed, smi, dl_smi, eigenspace, dcrcb, reconstruct };

std::string_view method_tag(Method m);
/// Inverse of method_tag(); throws ConfigError for an unknown tag.
Method method_from_tag(std::string_view tag);
/// Every method in output order, optimal first.
const std::vector<Method>& all_methods();

struct BeamformerWeights {
  ComplexVector w;
  Method method = Method::smi;
  /// Vector the Capon normalization refers to: w^H steering = 1.
  ComplexVector steering;
  std::map<std::string, double> diagnostics;
};

/// w = R^-1 s / (s^H R^-1 s). The inverse floors eigenvalues at
/// noise_floor * 1e-8; with noise_floor <= 0 the floor is taken from the
/// smallest eigenvalue of R. NumericalError when R is not positive.
BeamformerWeights capon_weights(const CovMatrix& r, const ComplexVector& sv,
                                double noise_floor = 0.0, Method method = Method::smi);

/// Capon weights on the reconstructed INCM toward C (a_bar + e_perp).
BeamformerWeights proposed_weights(const CovMatrix& r_incm, const CouplingMatrix& coupling,
                                   const SVEstimate& est);

BeamformerWeights smi_weights(const CovMatrix& r_sample, const ComplexVector& presumed_sv);

/// Capon form on R + gamma I. A missing loading selects gamma = 10 * noise
/// power estimate of R.
BeamformerWeights dl_smi_weights(const CovMatrix& r_sample, const ComplexVector& presumed_sv,
                                 std::optional<double> loading = std::nullopt);

/// Projects the presumed SV onto the `subspace_dim` principal eigenvectors of
/// R (eigenvalues descending, ties by original index) and applies the
/// Capon form toward the projection.
BeamformerWeights eigenspace_weights(const CovMatrix& r_sample, const ComplexVector& presumed_sv,
                                     int subspace_dim);

/// Doubly constrained robust Capon: minimize a^H R^-1 a with ||a||^2 = S
/// and ||a - a_bar||^2 <= eps. A missing eps selects 0.1 S. DomainError
/// unless 0 < eps < 2S.
BeamformerWeights dcrcb_weights(const CovMatrix& r_sample, const ComplexVector& presumed_sv,
                                std::optional<double> uncertainty = std::nullopt);

/// Angle-only baseline: INCM from the complement of the SOI sector at the
/// presumed radii, then the orthogonal mismatch step with the Gram matrix of
/// that INCM toward a_bar.
BeamformerWeights reconstruct_weights(const CovMatrix& r_sample, const CouplingMatrix& coupling,
                                      const std::vector<AngularSector>& complement,
                                      const NominalGeometry& geom, double theta_deg, double r1_bar,
                                      double r2_bar, double mismatch_bound = 0.0);

/// Lagrange-multiplier stationarity residual of a DCRCB solution, used by
/// tests: Re(a_bar^H a) - (S - eps / 2).
double dcrcb_residual(const ComplexVector& presumed_sv, const ComplexVector& optimized_sv,
                      double uncertainty);

}  // namespace fcarab
