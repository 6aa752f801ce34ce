#pragma once

#include <cstdint>
#include <random>

#include "ppca/basis.hpp"
#include "ppca/estimator.hpp"

namespace ppca {

using Rng = std::mt19937_64;

/// Deterministic sub-stream: the engine is seeded from a SplitMix64 hash of
/// (master, index), so streams never depend on scheduling order.
Rng make_stream(std::uint64_t master, std::uint64_t index);
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

/// f_t = A f_{t-1} + eps_t, eps_t ~ N(0, Sigma_eps).
struct VarProcess {
  Matrix A;
  Matrix Sigma_eps;
  int burn_in = 100;
};

/// Factor VAR(1) calibrated to daily returns: transition and innovation
/// covariance used by both simulation designs.
Matrix calibrated_transition();
Matrix calibrated_innovation_cov();
VarProcess calibrated_var();

double spectral_radius(const Matrix& a);

/// Starts at zero, discards burn_in steps and returns T x K retained draws.
/// Throws NonStationary when the spectral radius of A is >= 1.
Matrix simulate_var(const VarProcess& proc, int T, Rng& rng);

struct CalibratedParams {
  double gamma_shape = 7.06;
  double gamma_rate = 536.93;
  double offdiag_mean = -0.0019;
  double offdiag_sd = 0.1499;
  double corr_threshold = 0.03;
  double gamma_loading_sd = 0.0027;
  double pd_floor = 1e-8;
  VarProcess var = calibrated_var();
  Matrix Sigma_X = default_covariate_correlation();

  static Matrix default_covariate_correlation();
};

/// Symmetrises M, clips eigenvalues below floor to floor and rebuilds.
Matrix nearest_pd(const Matrix& m, double floor = 1e-8);

struct SparseErrorCov {
  Vector scales;      // D, Gamma-distributed
  Matrix truncated;   // Sigma_0 after thresholding, before the PD repair
  Matrix covariance;  // D Sigma_0 D, positive definite
};

/// Sparse idiosyncratic covariance: Gamma scales, Gaussian off-diagonal
/// correlations truncated below the threshold, eigenvalue clipping.
SparseErrorCov make_sparse_error_cov(int p, const CalibratedParams& params, Rng& rng);

struct SimulatedPanel {
  PanelData data;
  Matrix F_true;      // T x K, identified
  Matrix G_true;      // p x K, identified
  Matrix Gamma_true;  // p x K, same transform as G
  int K_true = 0;
  std::uint64_t seed = 0;

  Matrix lambda_true() const { return G_true + Gamma_true; }
};

struct Design2Options {
  double gamma_sd = 0.0;  // sd of the unexplained loading part
  double noise_sd = 1.0;
};

/// One standard-normal covariate, loadings x, x^2 - 1, x^3 - 2x, VAR factors
/// with identity innovations, i.i.d. N(0, noise_sd^2) errors.
SimulatedPanel gen_design2(int p, int T, Rng& rng, const Design2Options& options = {});

/// Loadings unrelated to the covariate: Lambda = Gamma with i.i.d. N(0, 1)
/// entries, one standard-normal covariate, VAR factors, N(0, 1) errors.
SimulatedPanel gen_unexplained(int p, int T, int K, Rng& rng);

/// Loading curves as sieve coefficients over a stored basis layout.
struct CurveModel {
  BasisLayout layout;
  Matrix coefficients;  // m x K

  int factors() const { return static_cast<int>(coefficients.cols()); }
};

/// Cubic additive curves for three factors over four standardised
/// characteristics (size, value, momentum, volatility).
CurveModel default_calibrated_curves();

/// X ~ N(0, Sigma_X), G from the curves, Gamma i.i.d. N(0, sd^2), sparse
/// Gaussian errors, calibrated VAR factors.
SimulatedPanel gen_calibrated(int p, int T, const CalibratedParams& params,
                              const CurveModel& curves, Rng& rng);

}  // namespace ppca
