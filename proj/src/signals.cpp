#include "fcarab/signals.hpp"

#include <cmath>

#include "fcarab/linalg.hpp"
#include "fcarab/rng.hpp"

namespace fcarab {

void SourceSet::validate() const {
  if (sources.empty()) throw ConfigError("at least one source (the SOI) is required");
  for (const auto& s : sources) {
    if (!(s.power >= 0.0) || !std::isfinite(s.power)) {
      throw ConfigError("source powers must be finite and non-negative");
    }
    for (double d : {s.theta_deg, s.presumed_deg}) {
      if (!(d >= -90.0 && d <= 90.0)) throw ConfigError("source directions must lie in [-90, 90]");
    }
  }
}

void SignalModel::validate() const {
  geometry.validate();
  sources.validate();
  if (!(r1_mm > 0.0) || !(r2_mm > 0.0)) throw ConfigError("true radii must be positive");
  if (coupling.rows() != geometry.size() || coupling.cols() != geometry.size()) {
    throw ConfigError("coupling matrix dimension does not match the array");
  }
  if (snapshots < 1) throw ConfigError("snapshot count must be positive");
  if (!(noise_power >= 0.0)) throw ConfigError("noise power must be non-negative");
}

ComplexVector SignalModel::effective_sv(std::size_t j) const {
  const auto a = steering_vector(geometry, sources.sources.at(j).theta_deg, r1_mm, r2_mm);
  return coupling * a.entries;
}

SnapshotBlock generate_snapshots(const SignalModel& model, std::uint64_t seed) {
  model.validate();
  const Eigen::Index s = model.geometry.size();
  const Eigen::Index k = model.snapshots;
  SnapshotBlock block{ComplexMatrix::Zero(s, k), seed};

  CounterRng noise(CounterRng::derive(seed, 0));
  for (Eigen::Index t = 0; t < k; ++t) {
    for (Eigen::Index i = 0; i < s; ++i) {
      block.data(i, t) = noise.circular_normal(model.noise_power);
    }
  }
  for (std::size_t j = 0; j < model.sources.size(); ++j) {
    const double amp = std::sqrt(model.sources.sources[j].power);
    if (amp == 0.0) continue;
    const ComplexVector sv = model.effective_sv(j);
    CounterRng wave(CounterRng::derive(seed, 1 + j));
    for (Eigen::Index t = 0; t < k; ++t) {
      block.data.col(t) += sv * (amp * wave.circular_normal(1.0));
    }
  }
  return block;
}

CovMatrix sample_covariance(const SnapshotBlock& block) {
  const auto k = block.snapshots();
  if (k < 1) throw DomainError("sample covariance needs at least one snapshot");
  ComplexMatrix r = block.data * block.data.adjoint() / static_cast<double>(k);
  return {hermitian_part(r), CovKind::sample};
}

CovMatrix true_incm(const SignalModel& model) {
  model.validate();
  const Eigen::Index s = model.geometry.size();
  ComplexMatrix r = model.noise_power * ComplexMatrix::Identity(s, s);
  for (std::size_t j = 1; j < model.sources.size(); ++j) {
    const ComplexVector v = model.effective_sv(j);
    r += model.sources.sources[j].power * (v * v.adjoint());
  }
  return {hermitian_part(r), CovKind::true_incm};
}

double noise_power_estimate(const CovMatrix& r) {
  if (r.value.rows() != r.value.cols() || r.value.rows() == 0) {
    throw DomainError("noise_power_estimate: covariance must be square and nonempty");
  }
  if (hermitian_defect(r.value) > 1e-10) {
    throw DomainError("noise_power_estimate: covariance is not Hermitian");
  }
  const double s = static_cast<double>(r.value.rows());
  const double floor = 1e-12 * r.value.trace().real() / s;
  const double smallest = hermitian_eigen(r.value).values.minCoeff();
  return std::max(smallest, floor);
}

}  // namespace fcarab
