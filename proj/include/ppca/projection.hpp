#pragma once

#include <Eigen/QR>

#include "ppca/linalg.hpp"

namespace ppca {

/// Orthogonal projector onto the column space of a design matrix Phi,
/// held as an orthonormal basis Q (p x r) so that P = QQ' is never formed.
/// Immutable after construction.
class Projector {
 public:
  static constexpr double kDefaultTolerance = 1e-10;

  /// Rank-revealing (column-pivoted) orthogonal factorisation of Phi.
  /// Pivots below tol relative to the largest are dropped.
  /// Throws DegenerateBasis when the retained rank is zero.
  explicit Projector(const Matrix& phi, double tol = kDefaultTolerance);

  Eigen::Index units() const { return q_.rows(); }
  Eigen::Index rank() const { return q_.cols(); }
  Eigen::Index basis_columns() const { return columns_; }
  double tolerance() const { return tol_; }
  const Matrix& basis() const { return q_; }

  /// P M = Q (Q' M).
  Matrix project(const Matrix& m) const;
  /// (I - P) M.
  Matrix residual(const Matrix& m) const;
  /// Coordinates Q' M of the projection (r x n).
  Matrix coordinates(const Matrix& m) const;

  /// Minimum-norm least-squares coefficients B with Phi B closest to M,
  /// i.e. a solution of the Gram system (Phi'Phi) B = Phi' M.
  Matrix sieve_coefficients(const Matrix& m) const;

 private:
  void check_rows(const Matrix& m) const;

  Matrix q_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> gram_;
  Eigen::Index columns_ = 0;
  double tol_ = kDefaultTolerance;
};

}  // namespace ppca
