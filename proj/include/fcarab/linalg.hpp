#pragma once

#include "fcarab/types.hpp"

namespace fcarab {

/// (A + A^H) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& a);

/// ||A - A^H||_F / ||A||_F, zero for the zero matrix.
double hermitian_defect(const ComplexMatrix& a);

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
struct HermitianEigen {
  RealVector values;
  ComplexMatrix vectors;
};

HermitianEigen hermitian_eigen(const ComplexMatrix& a);

/// Inverse of a Hermitian PSD matrix through its eigendecomposition.
///
/// Eigenvalues below `floor` are raised to `floor` before inversion. With
/// floor <= 0 no regularization is applied and a NumericalError carrying the
/// condition number is thrown when the matrix is numerically singular.
ComplexMatrix hermitian_inverse(const ComplexMatrix& a, double floor = 0.0);

/// x^H A x, real part only (A Hermitian).
double quadratic_form(const ComplexMatrix& a, const ComplexVector& x);

}  // namespace fcarab
