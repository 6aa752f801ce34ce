#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppca/linalg.hpp"

namespace ppca {

enum class BasisFamily { BSplineCubic, Polynomial, Fourier, Constant };
enum class KnotRule { Quantile, Uniform };

/// Raw covariates, one row per cross-sectional unit.
struct CovariateMatrix {
  Matrix values;  // p x d
  std::vector<std::string> column_names;

  Eigen::Index units() const { return values.rows(); }
  Eigen::Index dims() const { return values.cols(); }
};

/// Checks p >= 1, d >= 1 and finiteness; throws InvalidInput otherwise.
void validate(const CovariateMatrix& x);

struct BasisSpec {
  BasisFamily family = BasisFamily::BSplineCubic;
  int J = 8;
  KnotRule knot_rule = KnotRule::Quantile;
  bool include_intercept = true;
  bool standardize = true;
};

/// Throws InvalidSpec on J < 1, or J < 4 for cubic B-splines.
void validate(const BasisSpec& spec);

/// Number of design columns produced for d covariates.
int basis_columns(const BasisSpec& spec, Eigen::Index d);

BasisSpec basis_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BasisSpec& spec);

struct ColumnScale {
  double mean = 0.0;
  double sd = 1.0;
};

/// Standardises each column to sample mean 0 and sample variance 1
/// (denominator p - 1).
/// Throws ZeroVariance naming the first constant column.
std::pair<CovariateMatrix, std::vector<ColumnScale>> standardize_covariates(
    const CovariateMatrix& x);

/// Everything needed to rebuild a row of the design matrix at a new point:
/// standardisation, per-covariate evaluation range and knots, and the
/// column means subtracted during centering.
struct BasisLayout {
  BasisSpec spec;
  Eigen::Index d = 0;
  std::vector<ColumnScale> scales;  // empty when spec.standardize is false
  std::vector<double> lower;        // evaluation span per covariate (standardised units)
  std::vector<double> upper;
  std::vector<std::vector<double>> knots;  // full clamped knot vector, B-splines only
  Vector column_means;                     // length m; 0 for the intercept column

  int columns() const { return static_cast<int>(column_means.size()); }
};

struct BasisMatrix {
  Matrix values;  // p x m
  BasisLayout layout;
  std::vector<std::string> warnings;
};

/// Additive sieve design matrix. Column order: intercept (if any), then
/// one block of J columns per covariate. Non-intercept columns are centred.
BasisMatrix build_basis(const CovariateMatrix& x, const BasisSpec& spec);

/// floor(C * (p * min(T, p))^(1/kappa)), at least 4.
int default_J(int p, int T, double C = 3.0, double kappa = 4.0);

/// Cubic B-spline basis values at x for a clamped knot vector; returns
/// knots.size() - 4 values summing to one on [knots.front(), knots.back()].
Vector bspline_values(const std::vector<double>& knots, double x);

/// Uncentred block of J basis values for one covariate at a point already
/// in standardised units.
Vector block_values(const BasisLayout& layout, Eigen::Index covariate, double z);

struct CurveValues {
  Vector total;       // g_k(x), length K
  Matrix components;  // d x K additive pieces g_kl(x_l)
  Vector intercept;   // length K, zero when the basis has no intercept
};

/// Evaluates phi(x)' B at a raw covariate point. Points outside the fitted
/// span are clamped unless strict, in which case OutOfRange is thrown.
CurveValues eval_curves(const Matrix& coefficients, const BasisLayout& layout,
                        const Vector& x, bool strict = false);

/// Design row phi(x)' (centred) at a raw covariate point, clamped to the span.
Vector design_row(const BasisLayout& layout, const Vector& x, bool strict = false);

}  // namespace ppca
