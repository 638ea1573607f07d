#include <cmath>
#include <random>

#include "doctest.h"
#include "fcarab/acp.hpp"
#include "fcarab/geometry.hpp"
#include "support.hpp"

using namespace fcarab;

namespace {

// Independent position formula for one element, written out per ring.
Eigen::Vector2d position_oracle(const NominalGeometry& g, int label, double r1, double r2) {
  if (label < 0) {
    const double beta = label * g.wavelength_mm / (2.0 * g.ring1_radius_mm);
    return {r1 * std::sin(beta), r1 * std::cos(beta)};
  }
  const double beta = label * g.wavelength_mm / (2.0 * g.ring2_radius_mm);
  return {r2 * std::sin(beta), r1 + r2 * (std::cos(beta) - 1.0)};
}

}  // namespace

TEST_CASE("two-element positions follow the ring formulas") {
  const auto g = NominalGeometry::create(1, 1, 300.0, 700.0, 60.0);
  const auto p = element_positions(g, 300.0, 700.0);
  REQUIRE(p.size() == 2);
  const double b1 = -60.0 / (2.0 * 300.0);
  const double b2 = 60.0 / (2.0 * 700.0);
  CHECK(p[0].x() == doctest::Approx(300.0 * std::sin(b1)).epsilon(1e-14));
  CHECK(p[0].y() == doctest::Approx(300.0 * std::cos(b1)).epsilon(1e-14));
  CHECK(p[1].x() == doctest::Approx(700.0 * std::sin(b2)).epsilon(1e-14));
  CHECK(p[1].y() == doctest::Approx(300.0 + 700.0 * (std::cos(b2) - 1.0)).epsilon(1e-14));
}

TEST_CASE("element order is -M..-1 then 1..N") {
  const auto g = testing::example_array();
  CHECK(g.size() == 22);
  CHECK(g.label(0) == -9);
  CHECK(g.label(8) == -1);
  CHECK(g.label(9) == 1);
  CHECK(g.label(21) == 13);
  const auto p = element_positions(g, 503.0, 990.0);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto o = position_oracle(g, g.label(i), 503.0, 990.0);
    CHECK((p[static_cast<std::size_t>(i)] - o).norm() < 1e-10);
  }
}

TEST_CASE("nominal array has half-wavelength geodesic spacing") {
  const auto g = testing::example_array();
  const double half = g.wavelength_mm / 2.0;
  for (Eigen::Index i = 0; i + 1 < g.size(); ++i) {
    if (g.on_ring1(i) != g.on_ring1(i + 1)) continue;
    const double r = g.on_ring1(i) ? 500.0 : 1000.0;
    const double arc = r * std::abs(g.central_angle(i + 1) - g.central_angle(i));
    CHECK(std::abs(arc - half) / half < 1e-9);
  }
  CHECK(std::abs(min_geodesic_spacing(g, 500.0, 1000.0) - half) / half < 1e-9);
  // Scaling both radii scales every spacing.
  CHECK(min_geodesic_spacing(g, 450.0, 900.0) == doctest::Approx(0.9 * half).epsilon(1e-12));
}

TEST_CASE("positions are continuous in the radii") {
  const auto g = testing::example_array();
  const double h = 1e-6;
  for (double r1 = 450.0; r1 <= 550.0; r1 += 25.0) {
    for (double r2 = 900.0; r2 <= 1e5; r2 *= 3.0) {
      const auto a = element_positions(g, r1, r2);
      const auto b = element_positions(g, r1 + h, r2 + h);
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].allFinite());
        CHECK((a[i] - b[i]).norm() < 10.0 * h);
      }
    }
  }
}

TEST_CASE("non-positive radius is a domain error") {
  const auto g = testing::example_array();
  CHECK_THROWS_AS(element_positions(g, 0.0, 1000.0), DomainError);
  CHECK_THROWS_AS(element_positions(g, 500.0, -1.0), DomainError);
  CHECK_THROWS_AS(steering_vector(g, 10.0, -5.0, 1000.0), DomainError);
  CHECK_THROWS_AS(steering_vector(g, 91.0, 500.0, 1000.0), DomainError);
  CHECK_THROWS_AS(NominalGeometry::create(0, 3, 1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("steering vector matches an independent phase computation") {
  const auto g = testing::example_array();
  std::mt19937_64 gen(11);
  for (int t = 0; t < 50; ++t) {
    const double th = testing::uniform(gen, -90.0, 90.0);
    const double r1 = testing::uniform(gen, 480.0, 520.0);
    const double r2 = testing::uniform(gen, 970.0, 1030.0);
    const auto a = steering_vector(g, th, r1, r2);
    const double rad = th * kPi / 180.0;
    const Eigen::Vector2d u(std::sin(rad), std::cos(rad));
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double phase = g.wavenumber * position_oracle(g, g.label(i), r1, r2).dot(u);
      CHECK(std::abs(a.entries[i] - std::polar(1.0, phase)) < 1e-10);
    }
  }
}

TEST_CASE("steering vectors have unit-modulus entries") {
  const auto g = testing::example_array();
  std::mt19937_64 gen(12);
  for (int t = 0; t < 1000; ++t) {
    const auto a = steering_vector(g, testing::uniform(gen, -90, 90), testing::uniform(gen, 1, 900),
                                   testing::uniform(gen, 1, 2000));
    CHECK(a.entries.squaredNorm() == doctest::Approx(22.0).epsilon(1e-12));
    CHECK((a.entries.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("zero wavenumber gives all-ones vectors and zero derivatives") {
  auto g = testing::example_array();
  g.wavenumber = 0.0;
  const auto a = steering_vector(g, 33.0, 500.0, 1000.0);
  CHECK((a.entries - ComplexVector::Ones(22)).norm() == 0.0);
  const auto d = deviation_derivatives(g, 33.0, 1.0, 2.0);
  CHECK(d.d_x.norm() == 0.0);
  CHECK(d.d_y.norm() == 0.0);
}

TEST_CASE("deviation vector factorizes the steering vector") {
  const auto g = testing::example_array();
  std::mt19937_64 gen(13);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double th = testing::uniform(gen, -90.0, 90.0);
    const double x = testing::uniform(gen, -15.0, 15.0);
    const double y = testing::uniform(gen, -20.0, 20.0);
    const auto full = steering_vector(g, th, 500.0 + x, 1000.0 + y).entries;
    const auto pr = steering_vector(g, th, 500.0, 1000.0).entries;
    const auto alpha = deviation_vector(g, th, x, y).entries;
    worst = std::max(worst, (full - pr.cwiseProduct(alpha)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("deviation vector basics") {
  const auto g = testing::example_array();
  CHECK((deviation_vector(g, 17.0, 0.0, 0.0).entries - ComplexVector::Ones(22)).norm() == 0.0);
  const auto alpha = deviation_vector(g, -40.0, 3.0, -7.0).entries;
  const ComplexVector one = alpha.cwiseProduct(alpha.conjugate());
  CHECK((one - ComplexVector::Ones(22)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("deviation derivatives match central differences") {
  const auto g = testing::example_array();
  std::mt19937_64 gen(14);
  const double h = 1e-4;
  for (int t = 0; t < 50; ++t) {
    const double th = testing::uniform(gen, -90.0, 90.0);
    const double x = testing::uniform(gen, -15.0, 15.0);
    const double y = testing::uniform(gen, -20.0, 20.0);
    const auto d = deviation_derivatives(g, th, x, y);
    const ComplexVector fx = (deviation_vector(g, th, x + h, y).entries -
                              deviation_vector(g, th, x - h, y).entries) / (2 * h);
    const ComplexVector fy = (deviation_vector(g, th, x, y + h).entries -
                              deviation_vector(g, th, x, y - h).entries) / (2 * h);
    CHECK((fx - d.d_x).norm() / d.d_x.norm() < 1e-6);
    CHECK((fy - d.d_y).norm() / d.d_y.norm() < 1e-6);
    CHECK(d.d_y.head(9).norm() == 0.0);
  }
}

TEST_CASE("central angles come from the nominal radii only") {
  const auto g = testing::example_array();
  const auto b0 = element_basis(g);
  const auto p1 = element_positions(g, 400.0, 700.0);
  const auto p2 = element_positions(g, 600.0, 1300.0);
  for (Eigen::Index i = 0; i < 9; ++i) {
    // Ring-1 points are radial: same direction for any r1.
    const double a1 = std::atan2(p1[static_cast<std::size_t>(i)].x(), p1[static_cast<std::size_t>(i)].y());
    const double a2 = std::atan2(p2[static_cast<std::size_t>(i)].x(), p2[static_cast<std::size_t>(i)].y());
    CHECK(a1 == doctest::Approx(g.central_angle(i)).epsilon(1e-12));
    CHECK(a2 == doctest::Approx(g.central_angle(i)).epsilon(1e-12));
  }
  CHECK(b0.mu.cols() == 22);
}

TEST_CASE("ACP state validation") {
  ACPState ok{500.1, 1003.0, 500.0, 1000.0, 1.0, 5.0};
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.dx() == doctest::Approx(0.1));
  ACPState bad = ok;
  bad.r2 = 1006.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.l1 = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
