#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "ppca/basis.hpp"
#include "ppca/estimator.hpp"
#include "ppca/monte_carlo.hpp"
#include "ppca/simulate.hpp"

namespace ppca {

/// Writes factors.csv, loadings_g.csv, loadings_gamma.csv, loadings_lambda.csv
/// and coefficients.csv into dir and returns the manifest fields describing
/// the fit (K, m, eigenvalues, method, spec).
nlohmann::json write_fit_bundle(const std::filesystem::path& dir, const FitResult& fit,
                                const BasisLayout& layout);

/// Each additive component g_kl sampled on `points` equally spaced raw
/// covariate values spanning the training range. Columns: covariate, x, g1..gK.
Matrix sample_curves(const FitResult& fit, const BasisLayout& layout, const CovariateMatrix& X,
                     int points = 200);

/// Y.csv, X.csv, F_true.csv, G_true.csv, Gamma_true.csv.
void write_panel(const std::filesystem::path& dir, const SimulatedPanel& panel);
SimulatedPanel read_panel(const std::filesystem::path& dir);

/// One row per (design, p, T, method, metric) with mean and sd.
std::string summary_csv(const MonteCarloResult& result);
/// One row per (p, T, rep, method) with every metric.
std::string raw_csv(const MonteCarloResult& result);

}  // namespace ppca
