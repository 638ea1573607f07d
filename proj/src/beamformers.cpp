#include "fcarab/beamformers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fcarab/linalg.hpp"

namespace fcarab {

namespace {

struct TagEntry {
  Method method;
  std::string_view tag;
};

constexpr TagEntry kTags[] = {
    {Method::optimal, "optimal"},       {Method::proposed, "proposed"},
    {Method::smi, "smi"},               {Method::dl_smi, "dl_smi"},
    {Method::eigenspace, "eigenspace"}, {Method::dcrcb, "dcrcb"},
    {Method::reconstruct, "reconstruct"},
};

void check_square(const CovMatrix& r, const ComplexVector& sv) {
  if (r.value.rows() != r.value.cols() || r.value.rows() != sv.size()) {
    throw DomainError("covariance and steering vector dimensions differ");
  }
  if (!(sv.norm() > 0.0)) throw DomainError("steering vector is zero");
}

// Eigenvalues descending; equal values keep their ascending-index order.
std::vector<Eigen::Index> descending_order(const RealVector& values) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });
  return idx;
}

}  // namespace

std::string_view method_tag(Method m) {
  for (const auto& e : kTags) {
    if (e.method == m) return e.tag;
  }
  return "unknown";
}

Method method_from_tag(std::string_view tag) {
  for (const auto& e : kTags) {
    if (e.tag == tag) return e.method;
  }
  throw ConfigError("unknown method tag '" + std::string(tag) + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::optimal, Method::proposed,
                                              Method::eigenspace, Method::reconstruct,
                                              Method::dl_smi, Method::dcrcb, Method::smi};
  return methods;
}

BeamformerWeights capon_weights(const CovMatrix& r, const ComplexVector& sv, double noise_floor,
                                Method method) {
  check_square(r, sv);
  if (!r.value.allFinite()) throw NumericalError("covariance has non-finite entries");
  double floor = noise_floor;
  if (!(floor > 0.0)) {
    const auto eig = hermitian_eigen(hermitian_part(r.value));
    floor = eig.values[0];
    if (!(eig.values[eig.values.size() - 1] > 0.0)) {
      throw NumericalError("covariance is not positive");
    }
    floor = std::max(floor, 1e-12 * eig.values[eig.values.size() - 1]);
  }
  const ComplexMatrix r_inv = hermitian_inverse(r.value, floor * 1e-8);
  const ComplexVector num = r_inv * sv;
  const cplx denom = sv.dot(num);
  if (!(std::abs(denom) > 0.0) || !std::isfinite(std::abs(denom))) {
    throw NumericalError("Capon denominator vanished");
  }
  BeamformerWeights out;
  out.w = num / std::conj(denom);
  out.method = method;
  out.steering = sv;
  if (!out.w.allFinite()) throw NumericalError("Capon weights are not finite");
  return out;
}

BeamformerWeights proposed_weights(const CovMatrix& r_incm, const CouplingMatrix& coupling,
                                   const SVEstimate& est) {
  const ComplexVector sv = coupling.entries * est.combined();
  auto out = capon_weights(r_incm, sv, noise_power_estimate(r_incm), Method::proposed);
  out.diagnostics["x_mm"] = est.x;
  out.diagnostics["y_mm"] = est.y;
  out.diagnostics["iterations"] = est.iterations;
  out.diagnostics["converged"] = est.converged ? 1.0 : 0.0;
  out.diagnostics["mismatch_norm"] = est.e_perp.norm();
  return out;
}

BeamformerWeights smi_weights(const CovMatrix& r_sample, const ComplexVector& presumed_sv) {
  return capon_weights(r_sample, presumed_sv, noise_power_estimate(r_sample), Method::smi);
}

BeamformerWeights dl_smi_weights(const CovMatrix& r_sample, const ComplexVector& presumed_sv,
                                 std::optional<double> loading) {
  const double noise = noise_power_estimate(r_sample);
  const double gamma = loading.value_or(10.0 * noise);
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("diagonal loading must be non-negative");
  }
  CovMatrix loaded = r_sample;
  loaded.value.diagonal().array() += gamma;
  auto out = capon_weights(loaded, presumed_sv, noise + gamma, Method::dl_smi);
  out.diagnostics["loading"] = gamma;
  return out;
}

BeamformerWeights eigenspace_weights(const CovMatrix& r_sample, const ComplexVector& presumed_sv,
                                     int subspace_dim) {
  check_square(r_sample, presumed_sv);
  if (subspace_dim < 1 || subspace_dim > r_sample.size()) {
    throw DomainError("subspace dimension must lie in [1, S]");
  }
  const auto eig = hermitian_eigen(hermitian_part(r_sample.value));
  const auto order = descending_order(eig.values);
  ComplexMatrix basis(r_sample.size(), subspace_dim);
  for (int i = 0; i < subspace_dim; ++i) basis.col(i) = eig.vectors.col(order[i]);
  const ComplexVector projected = basis * (basis.adjoint() * presumed_sv);
  auto out = capon_weights(r_sample, projected, noise_power_estimate(r_sample),
                           Method::eigenspace);
  out.diagnostics["subspace_dim"] = subspace_dim;
  return out;
}

double dcrcb_residual(const ComplexVector& presumed_sv, const ComplexVector& optimized_sv,
                      double uncertainty) {
  const double s = presumed_sv.squaredNorm();
  return presumed_sv.dot(optimized_sv).real() - (s - 0.5 * uncertainty);
}

BeamformerWeights dcrcb_weights(const CovMatrix& r_sample, const ComplexVector& presumed_sv,
                                std::optional<double> uncertainty) {
  check_square(r_sample, presumed_sv);
  const double s = presumed_sv.squaredNorm();
  const double eps = uncertainty.value_or(0.1 * s);
  if (!(eps > 0.0) || !(eps < 2.0 * s)) {
    throw DomainError("DCRCB uncertainty must lie in (0, 2 ||a||^2)");
  }
  const double noise = noise_power_estimate(r_sample);
  const auto eig = hermitian_eigen(hermitian_part(r_sample.value));
  // Eigenvalues of R^-1 with the same floor the Capon step uses.
  RealVector q(eig.values.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = 1.0 / std::max(eig.values[i], noise * 1e-8);
  const ComplexVector z = eig.vectors.adjoint() * presumed_sv;
  const double target = s - 0.5 * eps;
  const double norm_s = std::sqrt(s);

  // Principal eigenvector of R, phase-aligned with a_bar.
  const Eigen::Index top = q.size() - 1;
  ComplexVector a;
  double multiplier = -q[top];
  const double overlap = std::abs(z[top]);
  if (norm_s * overlap >= target) {
    const cplx phase = overlap > 0.0 ? z[top] / overlap : cplx(1.0, 0.0);
    a = norm_s * phase * eig.vectors.col(top);
  } else {
    const double q_min = q[top];
    auto sv_at = [&](double t) {
      ComplexVector c(q.size());
      for (Eigen::Index i = 0; i < q.size(); ++i) c[i] = z[i] / (q[i] - q_min + t);
      ComplexVector v = eig.vectors * c;
      return ComplexVector(v * (norm_s / v.norm()));
    };
    auto g = [&](double t) { return presumed_sv.dot(sv_at(t)).real() - target; };
    double lo = 0.0;
    double hi = std::max(q.maxCoeff() - q_min, q_min) + 1e-300;
    int guard = 0;
    while (g(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 2000) throw NumericalError("DCRCB bracket search failed");
    }
    for (int it = 0; it < 400 && hi - lo > 1e-10 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    a = sv_at(hi);
    multiplier = hi - q_min;
  }
  auto out = capon_weights(r_sample, a, noise, Method::dcrcb);
  out.diagnostics["multiplier"] = multiplier;
  out.diagnostics["uncertainty"] = eps;
  out.diagnostics["residual"] = dcrcb_residual(presumed_sv, a, eps);
  return out;
}

BeamformerWeights reconstruct_weights(const CovMatrix& r_sample, const CouplingMatrix& coupling,
                                      const std::vector<AngularSector>& complement,
                                      const NominalGeometry& geom, double theta_deg, double r1_bar,
                                      double r2_bar, double mismatch_bound) {
  const double noise = noise_power_estimate(r_sample);
  const CovMatrix r_rec =
      reconstruct_angular(r_sample, coupling, complement, geom, r1_bar, r2_bar);
  const ComplexVector a_bar = steering_vector(geom, theta_deg, r1_bar, r2_bar).entries;
  const double bound = mismatch_bound > 0.0
                           ? mismatch_bound
                           : 0.3 * std::sqrt(static_cast<double>(geom.size()));
  const ComplexVector e = solve_p1(a_bar, whitened_gram(r_sample, coupling), bound);
  const ComplexVector sv = coupling.entries * (a_bar + e);
  auto out = capon_weights(r_rec, sv, noise, Method::reconstruct);
  out.diagnostics["mismatch_norm"] = e.norm();
  return out;
}

}  // namespace fcarab
