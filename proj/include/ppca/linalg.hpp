#pragma once

#include <Eigen/Dense>

namespace ppca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenpairs of a symmetric matrix in decreasing eigenvalue order.
struct SymEigen {
  Vector values;
  Matrix vectors;
};

/// Full symmetric eigendecomposition, sorted so that values(0) is the
/// largest. Each eigenvector is sign-normalised with fix_sign().
/// Throws EigenFailure when the solver does not converge or the relative
/// residual exceeds 1e-10.
SymEigen sym_eigen_desc(const Matrix& a);

/// Makes the entry of largest magnitude positive (lowest index on ties).
void fix_sign(Eigen::Ref<Vector> v);

/// Applies fix_sign() to every column.
void fix_column_signs(Matrix& m);

/// Largest |a_ij|, zero for an empty matrix.
double max_abs(const Matrix& a);

}  // namespace ppca
