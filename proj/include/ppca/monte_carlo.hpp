#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppca/basis.hpp"
#include "ppca/simulate.hpp"

namespace ppca {

enum class Design { Design2, Calibrated };
enum class Method { ProjectedPCA, RegularPCA, SieveLSKnownFactors };

const char* to_string(Design d);
const char* to_string(Method m);

struct JRule {
  double C = 3.0;
  double kappa = 4.0;
};

struct Scenario {
  Design design = Design::Design2;
  std::vector<int> p_grid;
  std::vector<int> T_grid;
  int K = 3;
  JRule j_rule;
  BasisFamily family = BasisFamily::BSplineCubic;
  std::vector<Method> methods;
  int n_reps = 0;
  std::uint64_t seed = 0;
};

/// Parses and validates a scenario; throws InvalidInput naming the bad field.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);

/// Sieve size for a panel: the J rule, capped so that J * d + 1 < p.
int scenario_J(const Scenario& s, int p, int T, int d);

/// Panel for one replication cell; the stream depends only on (seed, p, T, rep).
SimulatedPanel simulate_replication(const Scenario& s, int p, int T, int rep);

inline constexpr const char* kMetricNames[] = {"F_max",      "F_fro",     "Lambda_max",
                                               "Lambda_fro", "G_max",     "G_fro",
                                               "Gamma_max",  "Gamma_fro"};
inline constexpr int kMetricCount = 8;

struct ReplicationRecord {
  int p = 0;
  int T = 0;
  Method method = Method::ProjectedPCA;
  int rep = 0;
  bool ok = false;
  std::string error;
  // NaN where the metric does not apply to the method.
  double metrics[kMetricCount];
};

struct CellSummary {
  int p = 0;
  int T = 0;
  Method method = Method::ProjectedPCA;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  int n_ok = 0;
  int n_failed = 0;
};

struct MonteCarloResult {
  Scenario scenario;
  std::vector<ReplicationRecord> records;  // ordered by (p, T, rep, method)
  std::vector<CellSummary> summary;        // ordered by (p, T, method, metric)

  /// Mean of a metric for one cell; NaN when absent.
  double mean(int p, int T, Method method, const std::string& metric) const;
};

/// Runs every (p, T, replication) cell on `threads` workers. Output does not
/// depend on the thread count.
MonteCarloResult run_monte_carlo(const Scenario& s, int threads = 1);

}  // namespace ppca
