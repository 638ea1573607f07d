#include <random>

#include "doctest.h"
#include "fcarab/linalg.hpp"
#include "fcarab/svest.hpp"
#include "support.hpp"

using namespace fcarab;

namespace {

double quad(const ComplexMatrix& r, const ComplexVector& v) { return v.dot(r * v).real(); }

// Orthonormal basis of the complement of a, by Gram-Schmidt on unit vectors.
ComplexMatrix complement_basis(const ComplexVector& a) {
  const Eigen::Index s = a.size();
  std::vector<ComplexVector> basis{a.normalized()};
  for (Eigen::Index i = 0; i < s && static_cast<Eigen::Index>(basis.size()) < s; ++i) {
    ComplexVector v = ComplexVector::Unit(s, i);
    for (const auto& b : basis) v -= b.dot(v) * b;
    if (v.norm() > 1e-6) basis.push_back(v.normalized());
  }
  ComplexMatrix q(s, s - 1);
  for (Eigen::Index j = 1; j < s; ++j) q.col(j - 1) = basis[static_cast<std::size_t>(j)];
  return q;
}

BarrierProblem make_problem(std::mt19937_64& gen, double l1, double l2, double e_scale) {
  BarrierProblem p;
  p.geometry = testing::example_array();
  p.theta_deg = 10.0;
  p.a_pr = steering_vector(p.geometry, p.theta_deg, 500.0, 1000.0).entries;
  p.r_check = testing::random_psd(22, gen, 0.5);
  p.e_perp = e_scale * solve_p1(p.a_pr, p.r_check, 1e9);
  p.l1 = l1;
  p.l2 = l2;
  p.weight = 3.0;
  return p;
}

SignalModel single_source(double r1, double r2, int snapshots, double power = 100.0) {
  SignalModel m;
  m.geometry = testing::example_array();
  m.r1_mm = r1;
  m.r2_mm = r2;
  m.coupling = ComplexMatrix::Identity(22, 22);
  m.sources.sources = {{10.0, 10.0, power}};
  m.snapshots = snapshots;
  return m;
}

double correlation(const ComplexVector& a, const ComplexVector& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("solver config defaults and validation") {
  auto c = SolverConfig::defaults();
  REQUIRE(c.barrier_schedule.size() == 10);
  CHECK(c.barrier_schedule.front() == 100.0);
  CHECK(c.barrier_schedule.back() == 1.0);
  CHECK_NOTHROW(c.validate());
  CHECK(c.mismatch_bound_for(22) == doctest::Approx(0.3 * std::sqrt(22.0)));
  c.barrier_schedule = {1.0, 2.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SolverConfig::defaults();
  c.tau_x = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("p1 with identity weighting returns zero") {
  std::mt19937_64 gen(1);
  const ComplexVector a = testing::random_vector(8, gen);
  const ComplexVector e = solve_p1(a, ComplexMatrix::Identity(8, 8), 10.0);
  CHECK(e.norm() < 1e-12);
  CHECK_THROWS_AS(solve_p1(ComplexVector::Zero(8), ComplexMatrix::Identity(8, 8), 1.0),
                  DomainError);
}

TEST_CASE("p1 matches a descent oracle on the complement for S = 3") {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 5; ++t) {
    ComplexMatrix r = ComplexMatrix::Zero(3, 3);
    r(0, 0) = 1.0 + t;
    r(1, 1) = 3.0;
    r(2, 2) = 7.0 + 0.5 * t;
    const ComplexVector a = testing::random_vector(3, gen);
    const ComplexVector e = solve_p1(a, r, 1e9);
    CHECK(std::abs(a.dot(e)) < 1e-10 * a.norm() * (e.norm() + 1.0));

    // Gradient descent over the four real coordinates of the complement.
    const ComplexMatrix q = complement_basis(a);
    const ComplexMatrix h = q.adjoint() * r * q;
    const ComplexVector b = q.adjoint() * (r * a);
    ComplexVector c = ComplexVector::Zero(2);
    const double step = 1.0 / hermitian_eigen(hermitian_part(h)).values.maxCoeff();
    for (int it = 0; it < 20000; ++it) c -= step * (h * c + b);
    const double oracle = quad(r, a + q * c);
    CHECK(std::abs(quad(r, a + e) - oracle) < 1e-4);
  }
}

TEST_CASE("p1 never exceeds the unperturbed objective") {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 100; ++t) {
    const ComplexMatrix r = testing::random_psd(10, gen, 0.01);
    const ComplexVector a = testing::random_vector(10, gen);
    const double bound = t % 2 == 0 ? 1e9 : 0.1;
    const ComplexVector e = solve_p1(a, r, bound);
    CHECK(quad(r, a + e) <= quad(r, a) + 1e-10 * quad(r, a));
    CHECK(e.norm() <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("barrier gradient matches central differences") {
  std::mt19937_64 gen(4);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const BarrierProblem p = make_problem(gen, 1.0, 5.0, 0.5);
    const double x = testing::uniform(gen, -0.5, 0.5);
    const double y = testing::uniform(gen, -2.5, 2.5);
    double f0 = 0.0;
    try {
      f0 = barrier_value(p, x, y);
    } catch (const DomainError&) {
      continue;
    }
    (void)f0;
    const Eigen::Vector2d g = barrier_gradient(p, x, y);
    const double hx = 1e-5 * p.l1;
    const double hy = 1e-5 * p.l2;
    const double gx = (barrier_value(p, x + hx, y) - barrier_value(p, x - hx, y)) / (2 * hx);
    const double gy = (barrier_value(p, x, y + hy) - barrier_value(p, x, y - hy)) / (2 * hy);
    CHECK(std::abs(g[0] - gx) <= 1e-4 * std::max(1.0, std::abs(gx)));
    CHECK(std::abs(g[1] - gy) <= 1e-4 * std::max(1.0, std::abs(gy)));
    ++checked;
  }
  CHECK(checked >= 90);
}

TEST_CASE("box barrier diverges at the bound") {
  std::mt19937_64 gen(5);
  BarrierProblem p = make_problem(gen, 1.0, 5.0, 0.0);
  const double centre = barrier_value(p, 0.0, 0.0);
  const double edge = barrier_value(p, 1.0 - 1e-12, 0.0);
  CHECK(edge > centre + 20.0 * p.weight);
  CHECK_THROWS_AS(barrier_value(p, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(barrier_value(p, 0.0, -5.5), DomainError);
  CHECK_THROWS_AS(barrier_gradient(p, 1.2, 0.0), DomainError);
  // Box barrier gradient points away from the centre along each axis.
  BarrierProblem flat = p;
  flat.r_check = ComplexMatrix::Identity(22, 22);
  CHECK(barrier_gradient(flat, 0.4, 0.0)[0] > 0.0);
  CHECK(barrier_gradient(flat, -0.4, 0.0)[0] < 0.0);
  CHECK(std::abs(barrier_gradient(flat, 0.0, 0.0)[0]) < 1e-9);
}

TEST_CASE("barrier value for two elements matches a hand expansion") {
  const auto geom = NominalGeometry::at_carrier(1, 1, 500.0, 1000.0, 5e9);
  ComplexMatrix r(2, 2);
  r << cplx(2.0, 0.0), cplx(0.3, 0.4), cplx(0.3, -0.4), cplx(1.5, 0.0);
  BarrierProblem p;
  p.geometry = geom;
  p.theta_deg = 20.0;
  p.a_pr = steering_vector(geom, p.theta_deg, 500.0, 1000.0).entries;
  p.r_check = r;
  p.e_perp = ComplexVector::Zero(2);
  p.l1 = 2.0;
  p.l2 = 3.0;
  p.weight = 0.7;
  for (double x : {-1.5, 0.0, 0.8}) {
    for (double y : {-2.0, 0.5, 2.9}) {
      const ComplexVector a = steering_vector(geom, p.theta_deg, 500.0 + x, 1000.0 + y).entries;
      // a^H R a for 2x2 Hermitian R written out term by term.
      const double form = r(0, 0).real() * std::norm(a[0]) + r(1, 1).real() * std::norm(a[1]) +
                          2.0 * (std::conj(a[0]) * r(0, 1) * a[1]).real();
      const double expect =
          form - p.weight * std::log(4.0 - x * x) - p.weight * std::log(9.0 - y * y);
      CHECK(barrier_value(p, x, y) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("barrier value is real for random interior points") {
  std::mt19937_64 gen(6);
  const BarrierProblem p = make_problem(gen, 1.0, 5.0, 0.3);
  int finite = 0;
  for (int t = 0; t < 1000; ++t) {
    try {
      const double f = barrier_value(p, testing::uniform(gen, -0.9, 0.9),
                                     testing::uniform(gen, -4.5, 4.5));
      if (std::isfinite(f)) ++finite;
    } catch (const DomainError&) {
    }
  }
  CHECK(finite > 0);
}

TEST_CASE("p2 steps never increase the objective") {
  std::mt19937_64 gen(7);
  for (int t = 0; t < 5; ++t) {
    const BarrierProblem p = make_problem(gen, 1.0, 5.0, 0.5);
    const auto res = solve_p2(p.e_perp, p.a_pr, p.r_check, SolverConfig::defaults(), p.l1, p.l2,
                              p.theta_deg, p.geometry);
    CHECK(!res.steps.empty());
    for (const auto& s : res.steps) CHECK(s.f_after <= s.f_before);
    CHECK(std::abs(res.x) < p.l1);
    CHECK(std::abs(res.y) < p.l2);
  }
}

TEST_CASE("p2 rejects a start outside the box") {
  std::mt19937_64 gen(8);
  const BarrierProblem p = make_problem(gen, 1.0, 5.0, 0.0);
  CHECK_THROWS_AS(solve_p2(p.e_perp, p.a_pr, p.r_check, SolverConfig::defaults(), p.l1, p.l2,
                           p.theta_deg, p.geometry, Eigen::Vector2d(2.0, 0.0)),
                  DomainError);
}

TEST_CASE("p2 at zero deviation stays at the origin") {
  const auto m = single_source(500.0, 1000.0, 2000);
  const auto r = sample_covariance(generate_snapshots(m, 9));
  const ComplexMatrix r_check = whitened_gram(r, CouplingMatrix::identity(22));
  const ComplexVector a_pr = steering_vector(m.geometry, 10.0, 500.0, 1000.0).entries;
  const auto cfg = SolverConfig::defaults();
  const auto res = solve_p2(ComplexVector::Zero(22), a_pr, r_check, cfg, 1.0, 5.0, 10.0,
                            m.geometry);
  CHECK(std::abs(res.x) <= cfg.tau_x);
  CHECK(std::abs(res.y) <= cfg.tau_y);
}

TEST_CASE("p2 recovers a fixed ACP deviation") {
  const auto m = single_source(499.79, 1003.7, 220, 1e4);
  const auto r = sample_covariance(generate_snapshots(m, 10));
  const ComplexMatrix r_check = whitened_gram(r, CouplingMatrix::identity(22));
  const ComplexVector a_pr = steering_vector(m.geometry, 10.0, 500.0, 1000.0).entries;
  const auto res = solve_p2(ComplexVector::Zero(22), a_pr, r_check, SolverConfig::defaults(), 1.0,
                            5.0, 10.0, m.geometry);
  CHECK(std::abs(res.x + 0.21) <= 0.1 * 0.21);
  CHECK(std::abs(res.y - 3.7) <= 0.1 * 3.7);
}

TEST_CASE("p2 recovers a fixed ACP deviation with small final barrier weights") {
  const auto m = single_source(499.79, 1003.7, 220, 1e4);
  const auto r = sample_covariance(generate_snapshots(m, 10));
  const ComplexMatrix r_check = whitened_gram(r, CouplingMatrix::identity(22));
  const ComplexVector a_pr = steering_vector(m.geometry, 10.0, 500.0, 1000.0).entries;
  auto cfg = SolverConfig::defaults();
  cfg.barrier_schedule.clear();
  for (double w = 100.0; w > 1e-7; w /= 10.0) cfg.barrier_schedule.push_back(w);
  cfg.max_newton = 200;
  cfg.gradient_tol = 1e-14;
  const auto res = solve_p2(ComplexVector::Zero(22), a_pr, r_check, cfg, 1.0, 5.0, 10.0,
                            m.geometry);
  CHECK(std::abs(res.x + 0.21) <= 0.1 * 0.21);
  CHECK(std::abs(res.y - 3.7) <= 0.1 * 3.7);
}

TEST_CASE("estimate without mismatch reproduces the true steering vector") {
  const auto m = single_source(500.0, 1000.0, 2000);
  const auto r = sample_covariance(generate_snapshots(m, 11));
  const auto est = estimate_sv(r, CouplingMatrix::identity(22), 10.0,
                               ACPState::presumed(500.0, 1000.0, 1.0, 5.0),
                               SolverConfig::defaults(), m.geometry);
  const ComplexVector truth = steering_vector(m.geometry, 10.0, 500.0, 1000.0).entries;
  // The estimate is defined up to a common phase.
  const ComplexVector c = est.combined();
  const cplx phase = truth.dot(c) / std::abs(truth.dot(c));
  CHECK((c / phase - truth).norm() / truth.norm() < 0.05);
  CHECK(est.a_bar.squaredNorm() == doctest::Approx(22.0));
}

TEST_CASE("estimate under the fixed ACP error correlates with the truth") {
  SignalModel m = single_source(499.79, 1003.7, 46);
  m.sources.sources = {{10.0, 10.0, 100.0}, {-20.0, -20.0, 1000.0}, {-10.0, -10.0, 1000.0},
                       {20.0, 20.0, 1000.0}};
  const auto r = sample_covariance(generate_snapshots(m, 12));
  const auto est = estimate_sv(r, CouplingMatrix::identity(22), 10.0,
                               ACPState::presumed(500.0, 1000.0, 1.0, 5.0),
                               SolverConfig::defaults(), m.geometry);
  const ComplexVector truth = steering_vector(m.geometry, 10.0, 499.79, 1003.7).entries;
  CHECK(correlation(truth, est.combined()) > 0.99);
  CHECK(std::abs(est.x) < 1.0);
  CHECK(std::abs(est.y) < 5.0);
  CHECK(est.e_perp.norm() <= 0.3 * std::sqrt(22.0) * (1.0 + 1e-12));
}

TEST_CASE("huge tolerances stop after one outer iteration") {
  const auto m = single_source(499.79, 1003.7, 200);
  const auto r = sample_covariance(generate_snapshots(m, 13));
  auto cfg = SolverConfig::defaults();
  cfg.tau_x = cfg.tau_y = cfg.tau_e = 1e9;
  const auto est = estimate_sv(r, CouplingMatrix::identity(22), 10.0,
                               ACPState::presumed(500.0, 1000.0, 1.0, 5.0), cfg, m.geometry);
  CHECK(est.iterations == 1);
  CHECK(est.converged);
  cfg = SolverConfig::defaults();
  cfg.tau_x = cfg.tau_y = cfg.tau_e = 1e-300;
  cfg.max_outer = 2;
  const auto capped = estimate_sv(r, CouplingMatrix::identity(22), 10.0,
                                  ACPState::presumed(500.0, 1000.0, 1.0, 5.0), cfg, m.geometry);
  CHECK(capped.iterations == 2);
  CHECK_FALSE(capped.converged);
}

TEST_CASE("estimate keeps orthogonality and a non-increasing objective") {
  SignalModel m = single_source(499.79, 1003.7, 46);
  m.sources.sources = {{10.0, 10.0, 100.0}, {-20.0, -20.0, 1000.0}, {-10.0, -10.0, 1000.0},
                       {20.0, 20.0, 1000.0}};
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const auto r = sample_covariance(generate_snapshots(m, seed));
    const auto est = estimate_sv(r, CouplingMatrix::identity(22), 10.0,
                                 ACPState::presumed(500.0, 1000.0, 1.0, 5.0),
                                 SolverConfig::defaults(), m.geometry);
    for (double o : est.orthogonality_trace) CHECK(o <= 1e-8);
    for (std::size_t i = 1; i < est.objective_trace.size(); ++i) {
      CHECK(est.objective_trace[i] <= est.objective_trace[i - 1] + 1e-9);
    }
  }
}

TEST_CASE("frozen axis stays at zero") {
  const auto m = single_source(499.79, 1003.7, 500);
  const auto r = sample_covariance(generate_snapshots(m, 14));
  const auto est = estimate_sv(r, CouplingMatrix::identity(22), 10.0,
                               ACPState::presumed(500.0, 1000.0, 0.0, 5.0),
                               SolverConfig::defaults(), m.geometry);
  CHECK(est.x == 0.0);
  CHECK(std::abs(est.y) < 5.0);
}
