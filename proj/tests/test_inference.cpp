#include <doctest.h>

#include <random>

#include "ppca/basis.hpp"
#include "ppca/error.hpp"
#include "ppca/inference.hpp"
#include "ppca/simulate.hpp"

using namespace ppca;

namespace {

Matrix gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST_CASE("S_G vanishes when the data are orthogonal to the sieve space") {
  const Matrix phi = gaussian(50, 4, 1);
  const Projector proj(phi);
  const Matrix Y = proj.residual(gaussian(50, 12, 2));
  const TestResult r = test_g_zero(Y, proj, 2);
  CHECK(r.statistic < 1e-20);
  CHECK(r.df == 8);
  CHECK(r.p_value_chisq == doctest::Approx(1.0));
}

TEST_CASE("S_Gamma vanishes when the loadings lie in the sieve space") {
  const Matrix phi = gaussian(50, 4, 3);
  const Projector proj(phi);
  const Matrix Y = phi * gaussian(4, 2, 4) * gaussian(12, 2, 5).transpose();
  const TestResult r = test_gamma_zero(Y, proj, 2);
  CHECK(r.statistic < 1e-10);
  CHECK(r.df == 100);
}

TEST_CASE("statistics are non-negative and p-values are probabilities") {
  for (int s = 0; s < 5; ++s) {
    const Matrix phi = gaussian(60, 5, 10 + s);
    const Projector proj(phi);
    const Matrix Y = gaussian(60, 15, 20 + s);
    for (const TestResult& r : {test_g_zero(Y, proj, 2), test_gamma_zero(Y, proj, 2)}) {
      CHECK(r.statistic >= 0.0);
      CHECK(r.p_value_normal >= 0.0);
      CHECK(r.p_value_normal <= 1.0);
      CHECK(r.p_value_chisq >= 0.0);
      CHECK(r.p_value_chisq <= 1.0);
      CHECK(r.df > 0);
    }
  }
}

TEST_CASE("standardisation uses the documented centring") {
  const Matrix phi = gaussian(80, 4, 30);
  const Projector proj(phi);
  const Matrix Y = gaussian(80, 20, 31);
  const TestResult g = test_g_zero(Y, proj, 1);
  CHECK(g.standardized == doctest::Approx((80.0 * g.statistic - 4.0) / std::sqrt(8.0)));
  const TestResult h = test_gamma_zero(Y, proj, 1);
  CHECK(h.standardized == doctest::Approx((20.0 * h.statistic - 80.0) / std::sqrt(160.0)));
}

TEST_CASE("S_G depends on the basis only through its span") {
  const Matrix phi = gaussian(70, 5, 40);
  const Matrix R = gaussian(5, 5, 41) + 3.0 * Matrix::Identity(5, 5);
  const Matrix Y = gaussian(70, 18, 42);
  const double a = test_g_zero(Y, Projector(phi), 2).statistic;
  const double b = test_g_zero(Y, Projector(phi * R), 2).statistic;
  CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, a));
}

TEST_CASE("S_Gamma is scale free") {
  Rng rng(5);
  const SimulatedPanel panel = gen_design2(120, 30, rng, {0.3, 1.0});
  BasisSpec spec;
  spec.J = 6;
  const Projector proj(build_basis(panel.data.X, spec).values);
  const double a = test_gamma_zero(panel.data.Y, proj, 3).statistic;
  for (double c : {0.01, 3.0, 250.0}) {
    const double b = test_gamma_zero(c * panel.data.Y, proj, 3).statistic;
    CHECK(std::abs(a - b) < 1e-8 * a);
  }
}

TEST_CASE("singular weight is reported") {
  const Projector proj(gaussian(20, 3, 50));
  // Rank-one data: the second loading column of conventional PCA is zero.
  const Matrix Y = gaussian(20, 1, 51) * gaussian(8, 1, 52).transpose();
  CHECK_THROWS_AS(test_g_zero(Y, proj, 2), Error);
}

TEST_CASE("select_k on exactly low-rank projected data") {
  const Matrix phi = gaussian(100, 12, 60);
  const Projector proj(phi);
  const Matrix Y = phi * gaussian(12, 3, 61) * gaussian(30, 3, 62).transpose();
  const SelectionResult r = select_k(Y, &proj, 12);
  CHECK(r.K_hat == 3);
  CHECK(r.ratios.size() == 5);
  CHECK(r.eigenvalues.size() == 6);
  CHECK(r.method == SelectionMode::Projected);
  CHECK(select_k(42.0 * Y, &proj, 12).K_hat == 3);
}

TEST_CASE("select_k tie-breaking, range and scale freedom") {
  // Eigenvalues of Y'Y are 2^(9-k): every adjacent ratio equals 2.
  const Matrix U = gaussian(40, 10, 70).householderQr().householderQ() * Matrix::Identity(40, 10);
  const Matrix V = gaussian(10, 10, 71).householderQr().householderQ();
  Vector s(10);
  for (int k = 0; k < 10; ++k) s(k) = std::sqrt(std::pow(2.0, 9 - k));
  const Matrix Y = U * s.asDiagonal() * V.transpose();
  const SelectionResult r = select_k(Y, nullptr, 10);
  CHECK(r.K_hat == 1);
  CHECK(r.method == SelectionMode::Plain);

  const Matrix noisy = gaussian(40, 10, 72);
  CHECK(select_k(noisy, nullptr, 8).K_hat == select_k(0.001 * noisy, nullptr, 8).K_hat);
  CHECK_THROWS_AS(select_k(noisy, nullptr, 3), Error);
}

TEST_CASE("select_k truncates the range to the available periods") {
  const Matrix Y = gaussian(50, 5, 80);
  const SelectionResult r = select_k(Y, nullptr, 30);
  CHECK(r.ratios.size() == 4);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("result JSON schemas") {
  TestResult t;
  t.statistic = 1.5;
  t.df = 6;
  t.K_used = 2;
  const auto j = to_json(t);
  for (const char* key : {"statistic", "standardized", "df", "p_normal", "p_chisq", "K"}) {
    CHECK(j.contains(key));
  }
  SelectionResult s;
  s.K_hat = 2;
  s.ratios = {1.0, 3.0};
  const auto js = to_json(s);
  CHECK(js["K_hat"] == 2);
  CHECK(js["ratios"].size() == 2);
}
