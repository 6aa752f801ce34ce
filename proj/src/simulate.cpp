#include "ppca/simulate.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "ppca/error.hpp"

namespace ppca {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = normal(rng);
  }
  return z;
}

// Square-root factor L with L L' = S for a symmetric PSD S.
Matrix psd_root(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

// Applies the identification transform to (F, G) and carries Gamma along.
SimulatedPanel assemble(const Matrix& F, const Matrix& G, const Matrix& Gamma, const Matrix& U,
                        CovariateMatrix X) {
  const Identified id = identification_transform(F, G);
  const Matrix h_t_inv = id.H.transpose().inverse();

  SimulatedPanel out;
  out.F_true = id.F;
  out.G_true = id.G;
  out.Gamma_true = Gamma * h_t_inv;
  out.K_true = static_cast<int>(F.cols());
  out.data.Y = (out.G_true + out.Gamma_true) * out.F_true.transpose() + U;
  out.data.X = std::move(X);
  return out;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

Rng make_stream(std::uint64_t master, std::uint64_t index) {
  return Rng(mix_seed(master, index));
}

Matrix calibrated_transition() {
  Matrix a(3, 3);
  a << -0.0371, -0.1226, -0.1130,
       -0.2339, 0.1060, -0.2793,
        0.2803, 0.0755, -0.0529;
  return a;
}

Matrix calibrated_innovation_cov() {
  Matrix s(3, 3);
  s << 0.9076, 0.0049, 0.0230,
       0.0049, 0.8737, 0.0403,
       0.0230, 0.0403, 0.9266;
  return s;
}

VarProcess calibrated_var() { return {calibrated_transition(), calibrated_innovation_cov(), 100}; }

double spectral_radius(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(a, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix simulate_var(const VarProcess& proc, int T, Rng& rng) {
  const Eigen::Index K = proc.A.rows();
  if (proc.A.cols() != K || proc.Sigma_eps.rows() != K || proc.Sigma_eps.cols() != K) {
    throw Error(ErrorKind::DimensionMismatch, "VAR matrices must be K x K");
  }
  if (T < 1 || proc.burn_in < 0) throw Error(ErrorKind::InvalidInput, "VAR length must be positive");
  if (spectral_radius(proc.A) >= 1.0) {
    throw Error(ErrorKind::NonStationary, "transition matrix has spectral radius >= 1");
  }
  Eigen::LLT<Matrix> chol(proc.Sigma_eps);
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidInput, "innovation covariance is not positive definite");
  }
  const Matrix L = chol.matrixL();

  const int steps = proc.burn_in + T;
  const Matrix eps = L * standard_normal(K, steps, rng);
  Matrix out(T, K);
  Vector state = Vector::Zero(K);
  for (int s = 0; s < steps; ++s) {
    state = proc.A * state + eps.col(s);
    if (s >= proc.burn_in) out.row(s - proc.burn_in) = state.transpose();
  }
  return out;
}

Matrix CalibratedParams::default_covariate_correlation() {
  Matrix s(4, 4);
  s << 1.00, -0.20, 0.05, -0.40,
      -0.20, 1.00, -0.10, 0.15,
       0.05, -0.10, 1.00, 0.05,
      -0.40, 0.15, 0.05, 1.00;
  return s;
}

Matrix nearest_pd(const Matrix& m, double floor) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix must be square");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenFailure, "eigensolver failed in nearest_pd");
  }
  if (eig.eigenvalues()(0) >= floor) return sym;
  const Vector clipped = eig.eigenvalues().cwiseMax(floor);
  const Matrix out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

SparseErrorCov make_sparse_error_cov(int p, const CalibratedParams& params, Rng& rng) {
  if (p < 2) throw Error(ErrorKind::InvalidInput, "error covariance needs p >= 2");
  std::gamma_distribution<double> gamma(params.gamma_shape, 1.0 / params.gamma_rate);
  std::normal_distribution<double> corr(params.offdiag_mean, params.offdiag_sd);

  SparseErrorCov out;
  out.scales.resize(p);
  for (int i = 0; i < p; ++i) out.scales(i) = gamma(rng);

  out.truncated = Matrix::Identity(p, p);
  for (int j = 1; j < p; ++j) {
    for (int i = 0; i < j; ++i) {
      const double c = corr(rng);
      const double kept = std::abs(c) < params.corr_threshold ? 0.0 : c;
      out.truncated(i, j) = kept;
      out.truncated(j, i) = kept;
    }
  }
  const Matrix sigma0 = nearest_pd(out.truncated, params.pd_floor);
  const auto D = out.scales.asDiagonal();
  out.covariance = nearest_pd(D * sigma0 * D, params.pd_floor);
  return out;
}

SimulatedPanel gen_design2(int p, int T, Rng& rng, const Design2Options& options) {
  if (p <= 3 || T < 2) throw Error(ErrorKind::InvalidInput, "design 2 needs p > 3 and T >= 2");
  constexpr int K = 3;
  CovariateMatrix X;
  X.values = standard_normal(p, 1, rng);
  X.column_names = {"x"};

  Matrix G(p, K);
  for (int i = 0; i < p; ++i) {
    const double x = X.values(i, 0);
    G(i, 0) = x;
    G(i, 1) = x * x - 1.0;
    G(i, 2) = x * x * x - 2.0 * x;
  }
  const VarProcess proc{calibrated_transition(), Matrix::Identity(K, K), 100};
  const Matrix F = simulate_var(proc, T, rng);
  const Matrix U = options.noise_sd * standard_normal(p, T, rng);
  Matrix Gamma = Matrix::Zero(p, K);
  if (options.gamma_sd > 0.0) Gamma = options.gamma_sd * standard_normal(p, K, rng);
  return assemble(F, G, Gamma, U, std::move(X));
}

SimulatedPanel gen_unexplained(int p, int T, int K, Rng& rng) {
  if (K < 1 || K > 3) throw Error(ErrorKind::InvalidInput, "K must be 1, 2 or 3");
  if (p <= K || T < 2) throw Error(ErrorKind::InvalidInput, "need p > K and T >= 2");
  CovariateMatrix X;
  X.values = standard_normal(p, 1, rng);
  X.column_names = {"x"};
  const Matrix loadings = standard_normal(p, K, rng);
  const VarProcess proc{calibrated_transition().topLeftCorner(K, K), Matrix::Identity(K, K), 100};
  const Matrix F = simulate_var(proc, T, rng);
  const Matrix U = standard_normal(p, T, rng);

  // Identify on (F, Lambda); the whole loading matrix is the unexplained part.
  SimulatedPanel out = assemble(F, loadings, Matrix::Zero(p, K), U, std::move(X));
  out.Gamma_true = out.G_true;
  out.G_true.setZero();
  return out;
}

CurveModel default_calibrated_curves() {
  constexpr int d = 4;
  constexpr int J = 3;
  constexpr int K = 3;
  CurveModel curves;
  BasisLayout& layout = curves.layout;
  layout.spec.family = BasisFamily::Polynomial;
  layout.spec.J = J;
  layout.spec.include_intercept = true;
  layout.spec.standardize = false;
  layout.d = d;
  layout.lower.assign(d, -4.0);
  layout.upper.assign(d, 4.0);
  // Population means of (x, x^2, x^3) under N(0, 1).
  layout.column_means = Vector::Zero(1 + J * d);
  for (int l = 0; l < d; ++l) layout.column_means(1 + l * J + 1) = 1.0;

  // Rows: intercept, then (x, x^2, x^3) for size, value, momentum, volatility.
  Matrix b(1 + J * d, K);
  b << 0.0090, 0.0010, -0.0005,
      -0.0010, 0.0025, -0.0004,
       0.0004, -0.0005, 0.0002,
       0.0001, -0.0002, 0.0000,
       0.0008, -0.0006, 0.0020,
      -0.0003, 0.0004, 0.0005,
       0.0000, 0.0001, -0.0003,
       0.0005, 0.0010, -0.0018,
       0.0002, -0.0002, 0.0004,
      -0.0001, 0.0000, 0.0002,
       0.0030, -0.0015, 0.0007,
       0.0006, 0.0003, -0.0004,
      -0.0002, 0.0001, 0.0000;
  curves.coefficients = b;
  return curves;
}

SimulatedPanel gen_calibrated(int p, int T, const CalibratedParams& params,
                              const CurveModel& curves, Rng& rng) {
  const Eigen::Index d = params.Sigma_X.rows();
  const int K = curves.factors();
  if (p < 2 || T < 2) throw Error(ErrorKind::InvalidInput, "need p >= 2 and T >= 2");
  if (curves.layout.d != d) {
    throw Error(ErrorKind::DimensionMismatch, "curve model and Sigma_X disagree on d");
  }
  if (params.var.A.rows() != K) {
    throw Error(ErrorKind::DimensionMismatch, "VAR dimension differs from the number of curves");
  }

  CovariateMatrix X;
  X.values = standard_normal(p, d, rng) * psd_root(params.Sigma_X).transpose();
  X.column_names = {"size", "value", "momentum", "volatility"};
  X.column_names.resize(static_cast<std::size_t>(d));

  Matrix G(p, K);
  for (int i = 0; i < p; ++i) {
    G.row(i) = eval_curves(curves.coefficients, curves.layout, X.values.row(i).transpose()).total;
  }
  Matrix Gamma = Matrix::Zero(p, K);
  if (params.gamma_loading_sd > 0.0) Gamma = params.gamma_loading_sd * standard_normal(p, K, rng);

  const SparseErrorCov cov = make_sparse_error_cov(p, params, rng);
  const Matrix U = psd_root(cov.covariance) * standard_normal(p, T, rng);
  const Matrix F = simulate_var(params.var, T, rng);
  return assemble(F, G, Gamma, U, std::move(X));
}

}  // namespace ppca
