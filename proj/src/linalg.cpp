#include "ppca/linalg.hpp"

#include <cmath>

#include "ppca/error.hpp"

namespace ppca {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SingularWeight: return "SingularWeight";
    case ErrorKind::RangeEmpty: return "RangeEmpty";
    case ErrorKind::NonStationary: return "NonStationary";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

bool Error::is_numerical() const noexcept {
  switch (kind_) {
    case ErrorKind::DegenerateBasis:
    case ErrorKind::EigenFailure:
    case ErrorKind::RankDeficient:
    case ErrorKind::SingularWeight:
    case ErrorKind::NonStationary:
      return true;
    default:
      return false;
  }
}

void fix_sign(Eigen::Ref<Vector> v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  if (v(best) < 0) v = -v;
}

void fix_column_signs(Matrix& m) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) fix_sign(m.col(k));
}

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

SymEigen sym_eigen_desc(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "eigendecomposition needs a square matrix");
  }
  const Eigen::Index n = a.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenFailure, "symmetric eigensolver did not converge");
  }
  SymEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  fix_column_signs(out.vectors);

  const double scale = n == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
  if (scale > 0.0) {
    const Matrix resid = a * out.vectors - out.vectors * out.values.asDiagonal();
    if (max_abs(resid) > 1e-10 * scale) {
      throw Error(ErrorKind::EigenFailure, "eigenpair residual above tolerance");
    }
  }
  return out;
}

}  // namespace ppca
