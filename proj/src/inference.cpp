#include "ppca/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "ppca/error.hpp"

namespace ppca {

namespace {

void fill_p_values(TestResult& r, double scaled) {
  const double df = static_cast<double>(r.df);
  r.standardized = (scaled - df) / std::sqrt(2.0 * df);
  r.p_value_normal = boost::math::cdf(boost::math::complement(boost::math::normal(), r.standardized));
  r.p_value_chisq = scaled <= 0.0 ? 1.0
                                  : boost::math::cdf(boost::math::complement(
                                        boost::math::chi_squared(df), scaled));
}

}  // namespace

nlohmann::json to_json(const TestResult& r) {
  return {{"statistic", r.statistic}, {"standardized", r.standardized}, {"df", r.df},
          {"p_normal", r.p_value_normal}, {"p_chisq", r.p_value_chisq}, {"K", r.K_used}};
}

nlohmann::json to_json(const SelectionResult& r) {
  std::vector<double> eig(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
  return {{"K_hat", r.K_hat},
          {"ratios", r.ratios},
          {"eigenvalues", eig},
          {"method", r.method == SelectionMode::Projected ? "projected" : "plain"},
          {"at_boundary", r.at_boundary},
          {"warnings", r.warnings}};
}

TestResult test_g_zero(const Matrix& Y, const Projector& projector, int K) {
  const double p = static_cast<double>(Y.rows());
  const FitResult pca = fit_regular_pca(Y, K);
  const Matrix& loadings = pca.Lambda_hat;

  const Matrix gram = loadings.transpose() * loadings / p;
  const Eigen::SelfAdjointEigenSolver<Matrix> check(gram, Eigen::EigenvaluesOnly);
  if (!(check.eigenvalues()(0) > 1e-12 * check.eigenvalues()(K - 1))) {
    throw Error(ErrorKind::SingularWeight, "estimated loadings are collinear");
  }
  const Matrix coords = projector.coordinates(loadings);
  const Matrix projected_gram = coords.transpose() * coords;
  const double trace = gram.ldlt().solve(projected_gram).trace();

  TestResult r;
  r.K_used = K;
  r.statistic = std::max(trace / p, 0.0);
  r.df = static_cast<int>(projector.rank()) * K;
  fill_p_values(r, p * r.statistic);
  return r;
}

TestResult test_gamma_zero(const Matrix& Y, const Projector& projector, int K) {
  const double T = static_cast<double>(Y.cols());
  const FitResult fit = fit_projected_pca(Y, projector, K);
  const SigmaUDiag sigma = estimate_sigma_u(Y, fit.F_hat);
  const Matrix resid = projector.residual(fit.Lambda_hat);

  TestResult r;
  r.K_used = K;
  r.statistic = (resid.rowwise().squaredNorm().array() / sigma.variances.array()).sum();
  r.df = static_cast<int>(Y.rows()) * K;
  fill_p_values(r, T * r.statistic);
  return r;
}

SelectionResult select_k(const Matrix& Y, const Projector* projector, int m) {
  if (m < 4) {
    throw Error(ErrorKind::RangeEmpty, "eigenvalue-ratio search needs m >= 4, got " +
                                           std::to_string(m));
  }
  const Eigen::Index T = Y.cols();
  Matrix gram;
  if (projector != nullptr) {
    const Matrix coords = projector->coordinates(Y);
    gram = coords.transpose() * coords;
  } else {
    gram = Y.transpose() * Y;
  }
  const SymEigen eig = sym_eigen_desc(0.5 * (gram + gram.transpose()));

  SelectionResult out;
  out.method = projector != nullptr ? SelectionMode::Projected : SelectionMode::Plain;
  // k ranges over 0 < k < m/2 and needs lambda_{k+1}.
  const Eigen::Index wanted = (m + 1) / 2;
  Eigen::Index count = wanted;
  if (count > T) {
    count = T;
    out.warnings.push_back("search range truncated to k < " + std::to_string(T) +
                           " by the number of periods");
  }
  const double lead = std::max(eig.values(0), 0.0);
  const double floor = lead > 0.0 ? 1e-12 * lead : std::numeric_limits<double>::min();
  out.eigenvalues = eig.values.head(count).cwiseMax(floor);

  const Eigen::Index k_max = count - 1;
  if (k_max < 1) throw Error(ErrorKind::RangeEmpty, "fewer than two eigenvalues available");
  // Ratios equal to within rounding count as tied; the smaller k wins.
  constexpr double kTieTol = 1e-10;
  double best = -1.0;
  for (Eigen::Index k = 1; k <= k_max; ++k) {
    const double ratio = out.eigenvalues(k - 1) / out.eigenvalues(k);
    out.ratios.push_back(ratio);
    if (ratio > best * (1.0 + kTieTol)) {
      best = ratio;
      out.K_hat = static_cast<int>(k);
    }
  }
  out.at_boundary = out.K_hat == k_max;
  if (out.at_boundary) out.warnings.push_back("ratio maximised at the edge of the search range");
  return out;
}

}  // namespace ppca
