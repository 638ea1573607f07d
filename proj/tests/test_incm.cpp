#include <random>

#include "doctest.h"
#include "fcarab/incm.hpp"
#include "fcarab/linalg.hpp"
#include "fcarab/rng.hpp"
#include "support.hpp"

using namespace fcarab;

namespace {

CovMatrix example_sample(int snapshots, std::uint64_t seed, double r1 = 499.79, double r2 = 1003.7) {
  SignalModel m;
  m.geometry = testing::example_array();
  m.r1_mm = r1;
  m.r2_mm = r2;
  m.coupling = ComplexMatrix::Identity(22, 22);
  m.sources.sources = {{10.0, 10.0, 100.0}, {-20.0, -20.0, 1000.0}, {-10.0, -10.0, 1000.0},
                       {20.0, 20.0, 1000.0}};
  m.snapshots = snapshots;
  return sample_covariance(generate_snapshots(m, seed));
}

}  // namespace

TEST_CASE("sector sampling") {
  const auto s = AngularSector::with_step(-25.0, -15.0, 0.5);
  CHECK(s.samples == 21);
  const auto pts = s.points();
  CHECK(pts.front() == -25.0);
  CHECK(pts.back() == -15.0);
  CHECK(s.weight() == doctest::Approx(10.0 / 21.0));
  const AngularSector single{3.0, 7.0, 1};
  CHECK(single.points() == std::vector<double>{5.0});
  CHECK(single.weight() == doctest::Approx(4.0));
  const AngularSector point{4.0, 4.0, 1};
  CHECK(point.weight() == 1.0);

  const auto comp = complement_sectors(10.0, 5.0, 0.5);
  REQUIRE(comp.size() == 2);
  CHECK(comp[0].lo_deg == -90.0);
  CHECK(comp[0].hi_deg == 5.0);
  CHECK(comp[1].lo_deg == 15.0);
  CHECK(comp[1].hi_deg == 90.0);
}

TEST_CASE("single grid point collapses to one Capon term") {
  const auto g = testing::example_array();
  const auto r = example_sample(200, 1);
  SamplingGrid grid;
  grid.sectors = {AngularSector{-21.0, -19.0, 1}};  // centre -20, length 2
  grid.r1_samples = grid.r2_samples = 1;
  const auto acp = ACPState::presumed(500.0, 1000.0, 0.5, 0.5);
  const double noise = 0.7;
  const auto out = reconstruct_multidomain(r, CouplingMatrix::identity(22), grid, g, acp, noise);

  const ComplexMatrix r_inv = hermitian_inverse(r.value, noise);
  const ComplexVector a = steering_vector(g, -20.0, 500.0, 1000.0).entries;
  const double capon = 1.0 / a.dot(r_inv * a).real();
  ComplexMatrix expect = noise * ComplexMatrix::Identity(22, 22);
  expect += 2.0 * capon * a * a.adjoint();
  CHECK((out.value - expect).norm() < 1e-10 * expect.norm());
}

TEST_CASE("zero ACP bounds reduce to the angle-only reconstruction") {
  const auto g = testing::example_array();
  const auto r = example_sample(100, 2);
  const auto grid = interference_grid({-20.0, -10.0, 20.0}, 5.0, 0.5, 5, 5);
  const auto acp = ACPState::presumed(500.0, 1000.0, 0.0, 0.0);
  const double noise = noise_power_estimate(r);
  const auto multi = reconstruct_multidomain(r, CouplingMatrix::identity(22), grid, g, acp, noise);
  const auto ang =
      reconstruct_angular(r, CouplingMatrix::identity(22), grid.sectors, g, 500.0, 1000.0, noise);
  CHECK((multi.value - ang.value).norm() < 1e-10 * ang.value.norm());
}

TEST_CASE("multidomain output is Hermitian and bounded below by the noise") {
  std::mt19937_64 gen(41);
  const auto g = testing::example_array();
  for (int t = 0; t < 10; ++t) {
    const CovMatrix r{testing::random_psd(22, gen, 0.05)};
    const double noise = noise_power_estimate(r);
    const auto grid = interference_grid({testing::uniform(gen, -60, 60)}, 3.0, 1.0, 3, 2);
    const auto out = reconstruct_multidomain(r, CouplingMatrix::identity(22), grid, g,
                                             ACPState::presumed(500.0, 1000.0, 4.0, 6.0), noise);
    CHECK(hermitian_defect(out.value) < 1e-12);
    CHECK(hermitian_eigen(out.value).values[0] >= noise - 1e-10);
    CHECK(out.kind == CovKind::reconstructed);
  }
}

TEST_CASE("multidomain input errors") {
  const auto g = testing::example_array();
  const CovMatrix r{ComplexMatrix::Identity(22, 22)};
  const auto grid = interference_grid({-20.0}, 5.0, 0.5);
  const auto acp = ACPState::presumed(500.0, 1000.0, 1.0, 1.0);
  CHECK_THROWS_AS(reconstruct_multidomain(r, CouplingMatrix::identity(22), grid, g, acp, 0.0),
                  NumericalError);
  SamplingGrid empty;
  CHECK_THROWS_AS(reconstruct_multidomain(r, CouplingMatrix::identity(22), empty, g, acp, 1.0),
                  DomainError);
  CHECK_THROWS_AS(reconstruct_angular(r, CouplingMatrix::identity(22), {}, g, 500.0, 1000.0),
                  DomainError);
}

TEST_CASE("angular single point is a scaled rank-one matrix") {
  const auto g = testing::example_array();
  const auto r = example_sample(100, 3);
  const auto out = reconstruct_angular(r, CouplingMatrix::identity(22), {AngularSector{30.0, 30.0, 1}},
                                       g, 500.0, 1000.0);
  const auto eig = hermitian_eigen(out.value);
  CHECK(eig.values[20] < 1e-10 * eig.values[21]);
  const ComplexVector a = steering_vector(g, 30.0, 500.0, 1000.0).entries;
  const double capon = 1.0 / a.dot(hermitian_inverse(r.value, noise_power_estimate(r)) * a).real();
  CHECK(eig.values[21] == doctest::Approx(capon * 22.0).epsilon(1e-10));
}

TEST_CASE("angular reconstruction of a noise-only matrix") {
  const auto g = testing::example_array();
  const CovMatrix r{ComplexMatrix::Identity(22, 22)};
  const auto out = reconstruct_angular(r, CouplingMatrix::identity(22),
                                       complement_sectors(10.0, 5.0, 0.5), g, 500.0, 1000.0);
  CHECK(hermitian_defect(out.value) < 1e-12);
  CHECK(out.value.trace().real() > 0.0);
  CHECK(hermitian_eigen(out.value).values[0] > -1e-10);
}

TEST_CASE("strong interferer dominates the angular reconstruction") {
  const auto g = testing::example_array();
  SignalModel m;
  m.geometry = g;
  m.r1_mm = 500.0;
  m.r2_mm = 1000.0;
  m.coupling = ComplexMatrix::Identity(22, 22);
  m.sources.sources = {{10.0, 10.0, 1.0}, {-40.0, -40.0, 1e4}};
  m.snapshots = 200;
  const auto r = sample_covariance(generate_snapshots(m, 4));
  const auto out = reconstruct_angular(r, CouplingMatrix::identity(22),
                                       complement_sectors(10.0, 5.0, 0.5), g, 500.0, 1000.0);
  const auto eig = hermitian_eigen(out.value);
  const ComplexVector v = eig.vectors.col(21);
  const ComplexVector a = steering_vector(g, -40.0, 500.0, 1000.0).entries;
  CHECK(std::abs(v.dot(a)) / a.norm() > 0.99);
}

TEST_CASE("reconstructed INCM captures the true interferers") {
  const auto g = testing::example_array();
  const auto r = example_sample(46, 5);
  const auto grid = interference_grid({-20.0, -10.0, 20.0}, 5.0, 0.5, 5, 5);
  const auto acp = ACPState::presumed(500.0, 1000.0, 1.0, 5.0);
  const auto out = reconstruct_multidomain(r, CouplingMatrix::identity(22), grid, g, acp,
                                           noise_power_estimate(r));
  auto rayleigh = [&](double th) {
    const ComplexVector a = steering_vector(g, th, 499.79, 1003.7).entries;
    return a.dot(out.value * a).real() / a.squaredNorm();
  };
  const double soi = rayleigh(10.0);
  for (double th : {-20.0, -10.0, 20.0}) {
    CHECK(10.0 * std::log10(rayleigh(th) / soi) >= 20.0);
  }
}

TEST_CASE("reconstructed interference quotients track the true INCM") {
  const auto g = testing::example_array();
  SignalModel m;
  m.geometry = g;
  m.r1_mm = 499.79;
  m.r2_mm = 1003.7;
  m.coupling = ComplexMatrix::Identity(22, 22);
  m.sources.sources = {{10.0, 10.0, 100.0}, {-20.0, -20.0, 1000.0}, {-10.0, -10.0, 1000.0},
                       {20.0, 20.0, 1000.0}};
  m.snapshots = 46;
  const auto r = sample_covariance(generate_snapshots(m, 5));
  const auto truth = true_incm(m);
  const auto out = reconstruct_multidomain(r, CouplingMatrix::identity(22),
                                           interference_grid({-20.0, -10.0, 20.0}, 5.0, 0.5, 5, 5),
                                           g, ACPState::presumed(500.0, 1000.0, 1.0, 5.0),
                                           noise_power_estimate(r));
  auto ratio_db = [&](const ComplexMatrix& incm, double th) {
    auto q = [&](double t) {
      const ComplexVector a = steering_vector(g, t, 499.79, 1003.7).entries;
      return a.dot(incm * a).real();
    };
    return 10.0 * std::log10(q(th) / q(10.0));
  };
  for (double th : {-20.0, -10.0, 20.0}) {
    CHECK(std::abs(ratio_db(out.value, th) - ratio_db(truth.value, th)) < 3.0);
  }
}
