#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "fcarab/geometry.hpp"
#include "fcarab/types.hpp"

namespace testing {

using fcarab::ComplexMatrix;
using fcarab::ComplexVector;
using fcarab::cplx;

inline fcarab::NominalGeometry example_array() {
  return fcarab::NominalGeometry::at_carrier(9, 13, 500.0, 1000.0, 5e9);
}

inline ComplexVector random_vector(Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {nd(gen), nd(gen)};
  return v;
}

inline ComplexMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = {nd(gen), nd(gen)};
  }
  return m;
}

/// B B^H / n + shift I, exactly Hermitian.
inline ComplexMatrix random_psd(Eigen::Index n, std::mt19937_64& gen, double shift = 0.1) {
  const ComplexMatrix b = random_matrix(n, n, gen);
  ComplexMatrix r = b * b.adjoint() / static_cast<double>(n);
  r.diagonal().array() += shift;
  return 0.5 * (r + r.adjoint());
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

}  // namespace testing
