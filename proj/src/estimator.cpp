#include "ppca/estimator.hpp"

#include <cmath>
#include <limits>

#include "ppca/error.hpp"

namespace ppca {

namespace {

void check_k(int K, Eigen::Index limit, const char* what) {
  if (K < 1) throw Error(ErrorKind::InvalidInput, "number of factors must be at least 1");
  if (K >= limit) {
    throw Error(ErrorKind::KTooLarge, "K = " + std::to_string(K) + " must be below " + what +
                                          " = " + std::to_string(limit));
  }
}

// Fills factors, eigenvalues and tie warnings from the T x T Gram matrix.
void factors_from_gram(const Matrix& gram, int K, FitResult& fit) {
  const double T = static_cast<double>(gram.rows());
  const SymEigen eig = sym_eigen_desc(0.5 * (gram + gram.transpose()));
  fit.K = K;
  fit.F_hat = std::sqrt(T) * eig.vectors.leftCols(K);
  fit.eigvals = eig.values.head(K) / T;
  for (int k = 0; k < K; ++k) {
    const double next = eig.values(k + 1);
    if (next > 0.0 && eig.values(k) < (1.0 + 1e-8) * next) {
      fit.warnings.push_back("NearTie: eigenvalues " + std::to_string(k + 1) + " and " +
                             std::to_string(k + 2) + " are numerically tied");
    }
  }
}

}  // namespace

const char* to_string(FitMethod m) {
  return m == FitMethod::ProjectedPCA ? "projected_pca" : "regular_pca";
}

void validate(const PanelData& data) {
  if (data.units() < 2 || data.periods() < 2) {
    throw Error(ErrorKind::InvalidInput, "panel needs p >= 2 and T >= 2");
  }
  if (!data.Y.allFinite()) throw Error(ErrorKind::InvalidInput, "Y has non-finite entries");
  if (data.X.values.size() > 0) {
    validate(data.X);
    if (data.X.units() != data.units()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "Y has " + std::to_string(data.units()) + " rows but X has " +
                      std::to_string(data.X.units()));
    }
  }
}

FitResult fit_projected_pca(const PanelData& data, const Projector& projector, int K) {
  validate(data);
  return fit_projected_pca(data.Y, projector, K);
}

FitResult fit_projected_pca(const Matrix& Y, const Projector& projector, int K) {
  const Eigen::Index T = Y.cols();
  check_k(K, T, "T");
  if (K > projector.rank()) {
    throw Error(ErrorKind::KTooLarge, "K = " + std::to_string(K) + " exceeds the projector rank " +
                                          std::to_string(projector.rank()));
  }
  const Matrix coords = projector.coordinates(Y);  // r x T

  FitResult fit;
  fit.method = FitMethod::ProjectedPCA;
  factors_from_gram(coords.transpose() * coords, K, fit);

  const double t = static_cast<double>(T);
  fit.Lambda_hat = Y * fit.F_hat / t;
  fit.G_hat = projector.basis() * (coords * fit.F_hat) / t;
  fit.Gamma_hat = fit.Lambda_hat - fit.G_hat;
  // (a - b) + b can differ from a by one ulp; store the sum so the split is exact.
  fit.Lambda_hat = fit.G_hat + fit.Gamma_hat;
  fit.B_hat = projector.sieve_coefficients(fit.G_hat);
  return fit;
}

FitResult fit_regular_pca(const Matrix& Y, int K) {
  const Eigen::Index T = Y.cols();
  check_k(K, T, "T");
  FitResult fit;
  fit.method = FitMethod::RegularPCA;
  factors_from_gram(Y.transpose() * Y, K, fit);
  fit.Lambda_hat = Y * fit.F_hat / static_cast<double>(T);
  return fit;
}

double verify_equivalence(const Matrix& Y, const Projector& projector, const FitResult& fit) {
  const double T = static_cast<double>(Y.cols());
  const Matrix coords = projector.coordinates(Y);
  Eigen::BDCSVD<Matrix> svd(coords, Eigen::ComputeThinU);
  const int K = fit.K;
  // Eigenvectors of PYY'P/T are Q u_k with eigenvalues s_k^2 / T.
  const Matrix xi = projector.basis() * svd.matrixU().leftCols(K);
  const Vector root_d = svd.singularValues().head(K) / std::sqrt(T);
  const Matrix alt = xi * root_d.asDiagonal();
  return align_columns(alt, fit.G_hat).max_error;
}

SigmaUDiag estimate_sigma_u(const Matrix& Y, const Matrix& F_hat) {
  const double T = static_cast<double>(Y.cols());
  Matrix resid = Y;
  if (F_hat.cols() > 0) resid -= (Y * F_hat) * F_hat.transpose() / T;
  SigmaUDiag out;
  out.variances = resid.rowwise().squaredNorm() / T;
  const double scale = Y.rows() > 0 ? (Y.rowwise().squaredNorm() / T).maxCoeff() : 0.0;
  const double floor = scale > 0.0 ? 1e-12 * scale : std::numeric_limits<double>::min();
  out.variances = out.variances.cwiseMax(floor);
  return out;
}

Identified identification_transform(const Matrix& F, const Matrix& G) {
  const Eigen::Index K = F.cols();
  if (G.cols() != K || K == 0) {
    throw Error(ErrorKind::DimensionMismatch, "F and G need the same positive column count");
  }
  const double T = static_cast<double>(F.rows());

  const SymEigen sf = sym_eigen_desc(F.transpose() * F / T);
  if (!(sf.values(K - 1) > 1e-12 * sf.values(0))) {
    throw Error(ErrorKind::RankDeficient, "F'F is singular");
  }
  const Vector root = sf.values.cwiseSqrt();
  const Matrix s_half = sf.vectors * root.asDiagonal() * sf.vectors.transpose();
  const Matrix s_inv_half = sf.vectors * root.cwiseInverse().asDiagonal() * sf.vectors.transpose();

  const Matrix g_white = G * s_half;
  const SymEigen sg = sym_eigen_desc(g_white.transpose() * g_white);
  if (!(sg.values(K - 1) > 1e-12 * sg.values(0))) {
    throw Error(ErrorKind::RankDeficient, "G'G is singular");
  }

  Identified out;
  out.H = s_inv_half * sg.vectors;
  out.F = F * out.H;
  out.G = g_white * sg.vectors;
  for (Eigen::Index k = 0; k < K; ++k) {
    if (k + 1 < K && sg.values(k) < (1.0 + 1e-8) * sg.values(k + 1)) {
      out.warnings.push_back("NonDistinctEigenvalues: G'G entries " + std::to_string(k + 1) +
                             " and " + std::to_string(k + 2) + " are tied");
    }
    Eigen::Index lead = 0;
    out.F.col(k).cwiseAbs().maxCoeff(&lead);
    if (out.F(lead, k) < 0.0) {
      out.F.col(k) *= -1.0;
      out.G.col(k) *= -1.0;
      out.H.col(k) *= -1.0;
    }
  }
  return out;
}

Alignment apply_signs(const Matrix& est, const Matrix& truth, const Vector& signs) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols() || signs.size() != est.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "estimate and truth shapes differ");
  }
  Alignment out;
  out.signs = signs;
  out.aligned = est * signs.asDiagonal();
  const Matrix diff = out.aligned - truth;
  out.max_error = max_abs(diff);
  out.frobenius_scaled =
      est.rows() > 0 ? diff.norm() / std::sqrt(static_cast<double>(est.rows())) : 0.0;
  return out;
}

Alignment align_columns(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "estimate and truth shapes differ");
  }
  Vector signs = Vector::Ones(est.cols());
  for (Eigen::Index k = 0; k < est.cols(); ++k) {
    if ((est.col(k) + truth.col(k)).squaredNorm() < (est.col(k) - truth.col(k)).squaredNorm()) {
      signs(k) = -1.0;
    }
  }
  return apply_signs(est, truth, signs);
}

}  // namespace ppca
