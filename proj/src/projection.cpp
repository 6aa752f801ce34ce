#include "ppca/projection.hpp"

#include <string>

#include "ppca/error.hpp"

namespace ppca {

Projector::Projector(const Matrix& phi, double tol) : columns_(phi.cols()), tol_(tol) {
  if (phi.rows() < phi.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "basis has more columns than rows");
  }
  if (!phi.allFinite()) throw Error(ErrorKind::DegenerateBasis, "basis has non-finite entries");

  gram_.setThreshold(tol);
  gram_.compute(phi);
  const Eigen::Index r = gram_.rank();
  if (r == 0) throw Error(ErrorKind::DegenerateBasis, "basis has numerical rank zero");

  // The leading r Householder vectors span the pivoted column space.
  q_ = gram_.householderQ() * Matrix::Identity(phi.rows(), r);
}

void Projector::check_rows(const Matrix& m) const {
  if (m.rows() != q_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "matrix has " + std::to_string(m.rows()) +
                                                  " rows, projector expects " +
                                                  std::to_string(q_.rows()));
  }
}

Matrix Projector::coordinates(const Matrix& m) const {
  check_rows(m);
  return q_.transpose() * m;
}

Matrix Projector::project(const Matrix& m) const { return q_ * coordinates(m); }

Matrix Projector::residual(const Matrix& m) const { return m - project(m); }

Matrix Projector::sieve_coefficients(const Matrix& m) const {
  check_rows(m);
  return gram_.solve(m);
}

}  // namespace ppca
