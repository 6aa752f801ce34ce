#include "ppca/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ppca/error.hpp"

namespace ppca {

namespace {

const char* family_name(BasisFamily f) {
  switch (f) {
    case BasisFamily::BSplineCubic: return "bspline_cubic";
    case BasisFamily::Polynomial: return "polynomial";
    case BasisFamily::Fourier: return "fourier";
    case BasisFamily::Constant: return "constant";
  }
  return "bspline_cubic";
}

BasisFamily parse_family(const std::string& s) {
  if (s == "bspline_cubic" || s == "bspline") return BasisFamily::BSplineCubic;
  if (s == "polynomial") return BasisFamily::Polynomial;
  if (s == "fourier") return BasisFamily::Fourier;
  if (s == "constant") return BasisFamily::Constant;
  throw Error(ErrorKind::InvalidSpec, "unknown basis family '" + s + "'");
}

// Type-7 sample quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double prob) {
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> make_knots(const Vector& z, double lo, double hi, int J, KnotRule rule) {
  const int interior = J - 4;
  std::vector<double> knots(4, lo);
  if (interior > 0) {
    std::vector<double> sorted(z.data(), z.data() + z.size());
    std::sort(sorted.begin(), sorted.end());
    for (int j = 1; j <= interior; ++j) {
      const double prob = static_cast<double>(j) / (interior + 1);
      knots.push_back(rule == KnotRule::Quantile ? quantile_sorted(sorted, prob)
                                                 : lo + prob * (hi - lo));
    }
    for (std::size_t i = 4; i < knots.size(); ++i) {
      if (!(knots[i] > knots[i - 1]) || !(knots[i] < hi)) {
        throw Error(ErrorKind::InvalidSpec,
                    "too few distinct covariate values for " + std::to_string(interior) +
                        " interior knots");
      }
    }
  }
  knots.insert(knots.end(), 4, hi);
  return knots;
}

int block_offset(const BasisLayout& layout) { return layout.spec.include_intercept ? 1 : 0; }

double to_standard(const BasisLayout& layout, Eigen::Index l, double raw) {
  if (layout.scales.empty()) return raw;
  return (raw - layout.scales[l].mean) / layout.scales[l].sd;
}

}  // namespace

void validate(const CovariateMatrix& x) {
  if (x.units() < 1 || x.dims() < 1) {
    throw Error(ErrorKind::InvalidInput, "covariate matrix must have p >= 1 and d >= 1");
  }
  if (!x.values.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "covariate matrix has non-finite entries");
  }
}

void validate(const BasisSpec& spec) {
  if (spec.family == BasisFamily::Constant) return;
  if (spec.J < 1) throw Error(ErrorKind::InvalidSpec, "J must be at least 1");
  if (spec.family == BasisFamily::BSplineCubic && spec.J < 4) {
    throw Error(ErrorKind::InvalidSpec, "cubic B-splines need J >= 4");
  }
}

int basis_columns(const BasisSpec& spec, Eigen::Index d) {
  if (spec.family == BasisFamily::Constant) return 1;
  return spec.J * static_cast<int>(d) + (spec.include_intercept ? 1 : 0);
}

BasisSpec basis_spec_from_json(const nlohmann::json& j) {
  BasisSpec spec;
  try {
    if (j.contains("family")) spec.family = parse_family(j.at("family").get<std::string>());
    if (j.contains("J")) spec.J = j.at("J").get<int>();
    if (j.contains("knot_rule")) {
      const auto rule = j.at("knot_rule").get<std::string>();
      if (rule == "quantile") {
        spec.knot_rule = KnotRule::Quantile;
      } else if (rule == "uniform") {
        spec.knot_rule = KnotRule::Uniform;
      } else {
        throw Error(ErrorKind::InvalidSpec, "unknown knot_rule '" + rule + "'");
      }
    }
    if (j.contains("intercept")) spec.include_intercept = j.at("intercept").get<bool>();
    if (j.contains("standardize")) spec.standardize = j.at("standardize").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string("basis spec: ") + e.what());
  }
  if (spec.family == BasisFamily::Constant) spec.J = 1;
  validate(spec);
  return spec;
}

nlohmann::json to_json(const BasisSpec& spec) {
  return {{"family", family_name(spec.family)},
          {"J", spec.J},
          {"knot_rule", spec.knot_rule == KnotRule::Quantile ? "quantile" : "uniform"},
          {"intercept", spec.include_intercept},
          {"standardize", spec.standardize}};
}

std::pair<CovariateMatrix, std::vector<ColumnScale>> standardize_covariates(
    const CovariateMatrix& x) {
  validate(x);
  CovariateMatrix out = x;
  std::vector<ColumnScale> scales(static_cast<std::size_t>(x.dims()));
  const double p = static_cast<double>(x.units());
  for (Eigen::Index l = 0; l < x.dims(); ++l) {
    const double mean = x.values.col(l).mean();
    const double var =
        p > 1.0 ? (x.values.col(l).array() - mean).square().sum() / (p - 1.0) : 0.0;
    const double sd = std::sqrt(var);
    if (!(sd > 1e-14 * std::max(1.0, std::abs(mean)))) {
      const std::string name = l < static_cast<Eigen::Index>(x.column_names.size())
                                   ? x.column_names[l]
                                   : "column " + std::to_string(l);
      throw Error(ErrorKind::ZeroVariance, name + " is constant");
    }
    scales[l] = {mean, sd};
    out.values.col(l) = (x.values.col(l).array() - mean) / sd;
  }
  return {std::move(out), std::move(scales)};
}

int default_J(int p, int T, double C, double kappa) {
  const double n = static_cast<double>(p) * static_cast<double>(std::min(T, p));
  const int J = static_cast<int>(std::floor(C * std::pow(n, 1.0 / kappa)));
  return std::max(J, 4);
}

Vector bspline_values(const std::vector<double>& knots, double x) {
  constexpr int degree = 3;
  const int n = static_cast<int>(knots.size()) - degree - 1;
  Vector out = Vector::Zero(n);
  if (n <= 0) return out;

  // Knot span index s with knots[s] <= x < knots[s+1]; right end maps to the last span.
  int span = n - 1;
  if (x < knots[n]) {
    span = degree;
    while (span < n - 1 && x >= knots[span + 1]) ++span;
  }

  double left[degree + 1];
  double right[degree + 1];
  double vals[degree + 1];
  vals[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom == 0.0 ? 0.0 : vals[r] / denom;
      vals[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    vals[j] = saved;
  }
  for (int r = 0; r <= degree; ++r) out(span - degree + r) = vals[r];
  return out;
}

Vector block_values(const BasisLayout& layout, Eigen::Index covariate, double z) {
  const int J = layout.spec.J;
  Vector v(J);
  switch (layout.spec.family) {
    case BasisFamily::BSplineCubic:
      return bspline_values(layout.knots[covariate], z);
    case BasisFamily::Polynomial: {
      double power = 1.0;
      for (int j = 0; j < J; ++j) {
        power *= z;
        v(j) = power;
      }
      return v;
    }
    case BasisFamily::Fourier: {
      const double lo = layout.lower[covariate];
      const double u = (z - lo) / (layout.upper[covariate] - lo);
      for (int j = 0; j < J; ++j) {
        const double freq = 2.0 * std::numbers::pi * static_cast<double>(j / 2 + 1);
        v(j) = (j % 2 == 0) ? std::sin(freq * u) : std::cos(freq * u);
      }
      return v;
    }
    case BasisFamily::Constant:
      break;
  }
  return Vector::Ones(1);
}

BasisMatrix build_basis(const CovariateMatrix& x, const BasisSpec& spec_in) {
  validate(x);
  BasisSpec spec = spec_in;
  if (spec.family == BasisFamily::Constant) spec.J = 1;
  validate(spec);

  const Eigen::Index p = x.units();
  const Eigen::Index d = x.dims();
  const int m = basis_columns(spec, d);
  if (p <= m) {
    throw Error(ErrorKind::InvalidSpec, "need more units (" + std::to_string(p) +
                                            ") than basis columns (" + std::to_string(m) + ")");
  }

  BasisMatrix out;
  out.layout.spec = spec;
  out.layout.d = d;

  if (spec.family == BasisFamily::Constant) {
    out.values = Matrix::Ones(p, 1);
    out.layout.column_means = Vector::Zero(1);
    return out;
  }

  Matrix z = x.values;
  if (spec.standardize) {
    auto [standard, scales] = standardize_covariates(x);
    z = std::move(standard.values);
    out.layout.scales = std::move(scales);
  }

  for (Eigen::Index l = 0; l < d; ++l) {
    const double lo = z.col(l).minCoeff();
    const double hi = z.col(l).maxCoeff();
    if (!(hi > lo)) {
      throw Error(ErrorKind::ZeroVariance, "covariate " + std::to_string(l) + " is constant");
    }
    out.layout.lower.push_back(lo);
    out.layout.upper.push_back(hi);
    if (spec.family == BasisFamily::BSplineCubic) {
      out.layout.knots.push_back(make_knots(z.col(l), lo, hi, spec.J, spec.knot_rule));
    }
  }

  const int offset = block_offset(out.layout);
  out.values.resize(p, m);
  if (offset == 1) out.values.col(0).setOnes();
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index l = 0; l < d; ++l) {
      out.values.block(i, offset + l * spec.J, 1, spec.J) =
          block_values(out.layout, l, z(i, l)).transpose();
    }
  }

  out.layout.column_means = Vector::Zero(m);
  for (int c = offset; c < m; ++c) {
    const double mean = out.values.col(c).mean();
    out.layout.column_means(c) = mean;
    out.values.col(c).array() -= mean;
    if (out.values.col(c).norm() <= 1e-10 * std::sqrt(static_cast<double>(p))) {
      out.warnings.push_back("RankWarning: column " + std::to_string(c) +
                             " is numerically zero after centering");
    }
  }
  return out;
}

Vector design_row(const BasisLayout& layout, const Vector& x, bool strict) {
  const int m = layout.columns();
  if (x.size() != layout.d) {
    throw Error(ErrorKind::DimensionMismatch, "point has " + std::to_string(x.size()) +
                                                  " coordinates, basis expects " +
                                                  std::to_string(layout.d));
  }
  Vector row = Vector::Zero(m);
  if (layout.spec.family == BasisFamily::Constant) {
    row(0) = 1.0;
    return row;
  }
  const int offset = block_offset(layout);
  if (offset == 1) row(0) = 1.0;
  const int J = layout.spec.J;
  for (Eigen::Index l = 0; l < layout.d; ++l) {
    double z = to_standard(layout, l, x(l));
    const double lo = layout.lower[l];
    const double hi = layout.upper[l];
    if (z < lo || z > hi) {
      if (strict) {
        throw Error(ErrorKind::OutOfRange, "coordinate " + std::to_string(l) +
                                               " outside the fitted covariate span");
      }
      z = std::clamp(z, lo, hi);
    }
    row.segment(offset + l * J, J) = block_values(layout, l, z);
  }
  row -= layout.column_means;
  return row;
}

CurveValues eval_curves(const Matrix& coefficients, const BasisLayout& layout, const Vector& x,
                        bool strict) {
  const int m = layout.columns();
  if (coefficients.rows() != m) {
    throw Error(ErrorKind::DimensionMismatch, "coefficient rows do not match basis columns");
  }
  const Eigen::Index K = coefficients.cols();
  const Vector row = design_row(layout, x, strict);

  CurveValues out;
  out.total = coefficients.transpose() * row;
  out.components = Matrix::Zero(layout.d, K);
  out.intercept = Vector::Zero(K);
  if (layout.spec.family == BasisFamily::Constant) {
    out.intercept = coefficients.row(0).transpose();
    return out;
  }
  const int offset = block_offset(layout);
  if (offset == 1) out.intercept = coefficients.row(0).transpose();
  const int J = layout.spec.J;
  for (Eigen::Index l = 0; l < layout.d; ++l) {
    out.components.row(l) =
        row.segment(offset + l * J, J).transpose() * coefficients.middleRows(offset + l * J, J);
  }
  return out;
}

}  // namespace ppca
