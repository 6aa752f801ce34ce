#include <doctest.h>

#include <cmath>
#include <cstring>

#include "ppca/error.hpp"
#include "ppca/monte_carlo.hpp"

using namespace ppca;

namespace {

nlohmann::json small_scenario() {
  return nlohmann::json::parse(R"({
    "design": "design2", "p_grid": [40, 60], "T_grid": [8], "K": 3,
    "J_rule": {"C": 3, "kappa": 4}, "basis": {"family": "bspline_cubic"},
    "methods": ["projected_pca", "regular_pca", "sieve_ls_known_factors"],
    "n_reps": 4, "seed": 17})");
}

}  // namespace

TEST_CASE("scenario validation") {
  const Scenario s = scenario_from_json(small_scenario());
  CHECK(s.p_grid == std::vector<int>{40, 60});
  CHECK(s.methods.size() == 3);
  CHECK(scenario_from_json(to_json(s)).seed == 17);

  for (const char* patch : {R"({"n_reps": 0})", R"({"K": 2})", R"({"design": "design9"})",
                            R"({"methods": []})", R"({"methods": ["lasso"]})", R"({"p_grid": [1]})",
                            R"({"J_rule": {"C": 3, "kappa": 2}})"}) {
    nlohmann::json j = small_scenario();
    j.merge_patch(nlohmann::json::parse(patch));
    CHECK_THROWS_AS(scenario_from_json(j), Error);
  }
  nlohmann::json missing = small_scenario();
  missing.erase("n_reps");
  CHECK_THROWS_AS(scenario_from_json(missing), Error);
}

TEST_CASE("J rule is capped by the number of units") {
  Scenario s;
  CHECK(scenario_J(s, 500, 50, 1) == 37);
  CHECK(scenario_J(s, 20, 10, 1) == 11);
  CHECK(scenario_J(s, 12, 10, 1) == 9);
  CHECK(scenario_J(s, 8, 100, 1) == 6);
  CHECK(scenario_J(s, 6, 10, 4) == 4);
}

TEST_CASE("replication streams depend only on the cell") {
  const Scenario s = scenario_from_json(small_scenario());
  const SimulatedPanel a = simulate_replication(s, 40, 8, 2);
  const SimulatedPanel b = simulate_replication(s, 40, 8, 2);
  CHECK((a.data.Y == b.data.Y));
  CHECK(a.seed == b.seed);
  CHECK(simulate_replication(s, 40, 8, 3).seed != a.seed);
  CHECK(simulate_replication(s, 60, 8, 2).seed != a.seed);
}

TEST_CASE("results do not depend on the thread count") {
  const Scenario s = scenario_from_json(small_scenario());
  const MonteCarloResult one = run_monte_carlo(s, 1);
  const MonteCarloResult four = run_monte_carlo(s, 4);
  REQUIRE(one.records.size() == 2 * 4 * 3);
  REQUIRE(one.summary.size() == four.summary.size());
  for (std::size_t i = 0; i < one.summary.size(); ++i) {
    CHECK(one.summary[i].metric == four.summary[i].metric);
    CHECK(std::memcmp(&one.summary[i].mean, &four.summary[i].mean, sizeof(double)) == 0);
    CHECK(std::memcmp(&one.summary[i].sd, &four.summary[i].sd, sizeof(double)) == 0);
  }
  // 8 projected + 4 regular + 2 sieve-LS metrics per cell.
  CHECK(one.summary.size() == 2 * 14);
  for (const auto& r : one.records) CHECK(r.ok);
  CHECK(std::isnan(one.mean(40, 8, Method::RegularPCA, "G_max")));
  CHECK(one.mean(40, 8, Method::ProjectedPCA, "G_max") > 0.0);
}

TEST_CASE("failed replications are counted, not dropped") {
  nlohmann::json j = small_scenario();
  // p = 5 cannot carry a cubic sieve, so the sieve methods fail every time.
  j["p_grid"] = {5};
  j["n_reps"] = 3;
  const MonteCarloResult r = run_monte_carlo(scenario_from_json(j), 2);
  int projected_failures = 0;
  for (const auto& c : r.summary) {
    if (c.method == Method::RegularPCA) {
      CHECK(c.n_ok == 3);
      CHECK(c.n_failed == 0);
    } else {
      CHECK(c.n_ok == 0);
      CHECK(c.n_failed == 3);
      CHECK(std::isnan(c.mean));
      if (c.method == Method::ProjectedPCA) ++projected_failures;
    }
  }
  CHECK(projected_failures == kMetricCount);
  for (const auto& rec : r.records) {
    if (rec.method != Method::RegularPCA) CHECK_FALSE(rec.error.empty());
  }
}
