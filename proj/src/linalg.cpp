#include "fcarab/linalg.hpp"

#include <cmath>
#include <sstream>

namespace fcarab {

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

double hermitian_defect(const ComplexMatrix& a) {
  const double norm = a.norm();
  if (norm == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / norm;
}

HermitianEigen hermitian_eigen(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigendecomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix hermitian_inverse(const ComplexMatrix& a, double floor) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DomainError("hermitian_inverse: matrix must be square and nonempty");
  }
  if (!a.allFinite()) {
    throw NumericalError("hermitian_inverse: matrix has non-finite entries");
  }
  auto eig = hermitian_eigen(a);
  const double top = eig.values.maxCoeff();
  const double bottom = eig.values.minCoeff();
  if (!(top > 0.0)) {
    throw NumericalError("hermitian_inverse: matrix is not positive definite; regularize it",
                         std::numeric_limits<double>::infinity());
  }
  RealVector values = eig.values;
  if (floor > 0.0) {
    values = values.cwiseMax(floor);
  } else if (bottom <= top * 1e-14) {
    const double cond = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
    std::ostringstream msg;
    msg << "hermitian_inverse: matrix is singular (condition number " << cond
        << "); add diagonal loading or a noise-floor regularization";
    throw NumericalError(msg.str(), cond);
  }
  const ComplexMatrix& u = eig.vectors;
  ComplexMatrix inv = u * values.cwiseInverse().asDiagonal() * u.adjoint();
  return hermitian_part(inv);
}

double quadratic_form(const ComplexMatrix& a, const ComplexVector& x) {
  return x.dot(a * x).real();
}

}  // namespace fcarab
