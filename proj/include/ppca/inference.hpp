#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppca/estimator.hpp"

namespace ppca {

/// A specification-test outcome. p-values are only calibrated under the
/// Gaussian, serially independent noise the limit theory assumes.
struct TestResult {
  double statistic = 0.0;     // S_G or S_Gamma
  double standardized = 0.0;  // asymptotically N(0, 1) under the null
  int df = 0;                 // chi-square degrees of freedom
  double p_value_normal = 1.0;
  double p_value_chisq = 1.0;
  int K_used = 0;
};

nlohmann::json to_json(const TestResult& r);

/// Tests H0: G(X) = 0 with S_G = tr(W1 L'PL) / p, where L = YF/T uses
/// conventional-PCA factors and W1 = (L'L / p)^{-1}. The reference law of
/// p * S_G is chi-square with rank(P) * K degrees of freedom.
TestResult test_g_zero(const Matrix& Y, const Projector& projector, int K);

/// Tests H0: Gamma = 0 with S_Gamma = tr(L'(I-P) Su^{-1} (I-P) L), where
/// L = YF/T uses projected-PCA factors and Su is the diagonal residual
/// variance. The reference law of T * S_Gamma is chi-square with p * K
/// degrees of freedom.
TestResult test_gamma_zero(const Matrix& Y, const Projector& projector, int K);

enum class SelectionMode { Projected, Plain };

struct SelectionResult {
  int K_hat = 0;
  Vector eigenvalues;          // leading eigenvalues after flooring
  std::vector<double> ratios;  // ratios[k-1] = lambda_k / lambda_{k+1}
  SelectionMode method = SelectionMode::Projected;
  bool at_boundary = false;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const SelectionResult& r);

/// Eigenvalue-ratio estimate of the factor count over 0 < k < m/2, on Y'PY
/// when a projector is given and on Y'Y otherwise. Eigenvalues below
/// 1e-12 * lambda_1 are clamped; ties resolve to the smallest k.
SelectionResult select_k(const Matrix& Y, const Projector* projector, int m);

}  // namespace ppca
