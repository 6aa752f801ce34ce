#pragma once

#include <string>
#include <vector>

#include "ppca/basis.hpp"
#include "ppca/linalg.hpp"
#include "ppca/projection.hpp"

namespace ppca {

/// Observed panel: responses Y (units x time) and unit covariates X.
struct PanelData {
  Matrix Y;  // p x T
  CovariateMatrix X;

  Eigen::Index units() const { return Y.rows(); }
  Eigen::Index periods() const { return Y.cols(); }
};

/// Checks p >= 2, T >= 2, finite entries and matching row counts.
void validate(const PanelData& data);

enum class FitMethod { ProjectedPCA, RegularPCA };

const char* to_string(FitMethod m);

struct FitResult {
  FitMethod method = FitMethod::ProjectedPCA;
  int K = 0;
  Matrix F_hat;       // T x K, F'F/T = I
  Matrix G_hat;       // p x K, projected part (projected PCA only)
  Matrix Gamma_hat;   // p x K, residual part (projected PCA only)
  Matrix Lambda_hat;  // p x K, Y F / T
  Matrix B_hat;       // m x K sieve coefficients (projected PCA only)
  Vector eigvals;     // leading K eigenvalues of Y'PY / T (or Y'Y / T)
  std::vector<std::string> warnings;
};

/// Projected-PCA: factors from the top-K eigenvectors of the T x T matrix
/// Y'PY, loadings split into the sieve-space part PYF/T and its complement.
FitResult fit_projected_pca(const PanelData& data, const Projector& projector, int K);

/// Same, on the bare response matrix.
FitResult fit_projected_pca(const Matrix& Y, const Projector& projector, int K);

/// Conventional PCA on Y'Y; only F_hat, Lambda_hat and eigvals are set.
FitResult fit_regular_pca(const Matrix& Y, int K);

/// Largest entrywise gap between PYF/T and Xi D^{1/2}, where Xi and D are the
/// leading eigenpairs of PYY'P/T obtained from an SVD of the projected data.
double verify_equivalence(const Matrix& Y, const Projector& projector, const FitResult& fit);

/// Diagonal idiosyncratic variances diag(Y (I - FF'/T) Y') / T.
struct SigmaUDiag {
  Vector variances;
};

/// Floors each variance at 1e-12 times the largest row second moment of Y.
/// An empty F (K = 0) yields the row second moments.
SigmaUDiag estimate_sigma_u(const Matrix& Y, const Matrix& F_hat);

struct Identified {
  Matrix F;  // F H
  Matrix G;  // G (H')^{-1}
  Matrix H;  // K x K
  std::vector<std::string> warnings;
};

/// Finds H with (FH)'(FH)/T = I and (G H'^{-1})'(G H'^{-1}) diagonal and
/// decreasing. Column signs follow the largest-entry-positive rule on FH.
Identified identification_transform(const Matrix& F, const Matrix& G);

struct Alignment {
  Vector signs;       // +1 / -1 per column
  Matrix aligned;     // est with flipped columns
  double max_error = 0.0;
  double frobenius_scaled = 0.0;  // ||aligned - truth||_F / sqrt(n)
};

/// Flips each column of est toward the matching column of truth.
Alignment align_columns(const Matrix& est, const Matrix& truth);

/// Error of est against truth after applying given column signs.
Alignment apply_signs(const Matrix& est, const Matrix& truth, const Vector& signs);

}  // namespace ppca
