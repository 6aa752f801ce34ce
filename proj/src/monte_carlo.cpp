#include "ppca/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "ppca/error.hpp"
#include "ppca/estimator.hpp"
#include "ppca/projection.hpp"

namespace ppca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Method parse_method(const std::string& s) {
  if (s == "projected_pca") return Method::ProjectedPCA;
  if (s == "regular_pca") return Method::RegularPCA;
  if (s == "sieve_ls_known_factors") return Method::SieveLSKnownFactors;
  throw Error(ErrorKind::InvalidInput, "unknown method '" + s + "'");
}

std::vector<int> positive_grid(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
    throw Error(ErrorKind::InvalidInput, std::string("scenario needs a non-empty '") + key + "'");
  }
  std::vector<int> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_integer() || v.get<int>() < 2) {
      throw Error(ErrorKind::InvalidInput, std::string("'") + key + "' entries must be integers >= 2");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

bool applies(Method method, int metric) {
  switch (method) {
    case Method::ProjectedPCA: return true;
    case Method::RegularPCA: return metric < 4;
    case Method::SieveLSKnownFactors: return metric == 4 || metric == 5;
  }
  return false;
}

void set_metric(ReplicationRecord& r, int base, const Alignment& a) {
  r.metrics[base] = a.max_error;
  r.metrics[base + 1] = a.frobenius_scaled;
}

// Fits one replication with every requested method.
void evaluate(const Scenario& s, const SimulatedPanel& panel, std::vector<ReplicationRecord>& out) {
  const int p = static_cast<int>(panel.data.units());
  const int T = static_cast<int>(panel.data.periods());
  const Matrix lambda = panel.lambda_true();

  std::optional<Projector> projector;
  auto get_projector = [&]() -> const Projector& {
    if (!projector) {
      BasisSpec spec;
      spec.family = s.family;
      spec.J = scenario_J(s, p, T, static_cast<int>(panel.data.X.dims()));
      projector.emplace(build_basis(panel.data.X, spec).values);
    }
    return *projector;
  };

  for (ReplicationRecord& r : out) {
    try {
      switch (r.method) {
        case Method::ProjectedPCA: {
          const FitResult fit = fit_projected_pca(panel.data, get_projector(), s.K);
          const Alignment f = align_columns(fit.F_hat, panel.F_true);
          set_metric(r, 0, f);
          set_metric(r, 2, apply_signs(fit.Lambda_hat, lambda, f.signs));
          set_metric(r, 4, apply_signs(fit.G_hat, panel.G_true, f.signs));
          set_metric(r, 6, apply_signs(fit.Gamma_hat, panel.Gamma_true, f.signs));
          break;
        }
        case Method::RegularPCA: {
          const FitResult fit = fit_regular_pca(panel.data.Y, s.K);
          const Alignment f = align_columns(fit.F_hat, panel.F_true);
          set_metric(r, 0, f);
          set_metric(r, 2, apply_signs(fit.Lambda_hat, lambda, f.signs));
          break;
        }
        case Method::SieveLSKnownFactors: {
          const Matrix g = get_projector().project(panel.data.Y * panel.F_true) / T;
          set_metric(r, 4, apply_signs(g, panel.G_true, Vector::Ones(s.K)));
          break;
        }
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
  }
}

}  // namespace

const char* to_string(Design d) { return d == Design::Design2 ? "design2" : "calibrated"; }

const char* to_string(Method m) {
  switch (m) {
    case Method::ProjectedPCA: return "projected_pca";
    case Method::RegularPCA: return "regular_pca";
    case Method::SieveLSKnownFactors: return "sieve_ls_known_factors";
  }
  return "projected_pca";
}

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "scenario must be a JSON object");
  Scenario s;
  try {
    const std::string design = j.value("design", std::string("design2"));
    if (design == "design2") {
      s.design = Design::Design2;
    } else if (design == "calibrated") {
      s.design = Design::Calibrated;
    } else {
      throw Error(ErrorKind::InvalidInput, "unknown design '" + design + "'");
    }
    s.p_grid = positive_grid(j, "p_grid");
    s.T_grid = positive_grid(j, "T_grid");
    s.K = j.value("K", 3);
    if (j.contains("J_rule")) {
      const auto& rule = j.at("J_rule");
      s.j_rule.C = rule.value("C", 3.0);
      s.j_rule.kappa = rule.value("kappa", 4.0);
    }
    if (j.contains("basis")) s.family = basis_spec_from_json(j.at("basis")).family;
    if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty()) {
      throw Error(ErrorKind::InvalidInput, "scenario needs a non-empty 'methods' list");
    }
    for (const auto& m : j.at("methods")) s.methods.push_back(parse_method(m.get<std::string>()));
    if (!j.contains("n_reps")) throw Error(ErrorKind::InvalidInput, "scenario needs 'n_reps'");
    s.n_reps = j.at("n_reps").get<int>();
    s.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("scenario: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidSpec) throw Error(ErrorKind::InvalidInput, e.what());
    throw;
  }
  if (s.n_reps < 1) throw Error(ErrorKind::InvalidInput, "n_reps must be at least 1");
  if (s.K != 3) {
    throw Error(ErrorKind::InvalidInput,
                std::string(to_string(s.design)) + " design has exactly K = 3 factors");
  }
  if (!(s.j_rule.C > 0.0) || !(s.j_rule.kappa >= 4.0)) {
    throw Error(ErrorKind::InvalidInput, "J_rule needs C > 0 and kappa >= 4");
  }
  return s;
}

nlohmann::json to_json(const Scenario& s) {
  std::vector<std::string> methods;
  for (Method m : s.methods) methods.emplace_back(to_string(m));
  BasisSpec spec;
  spec.family = s.family;
  return {{"design", to_string(s.design)},
          {"p_grid", s.p_grid},
          {"T_grid", s.T_grid},
          {"K", s.K},
          {"J_rule", {{"C", s.j_rule.C}, {"kappa", s.j_rule.kappa}}},
          {"basis", {{"family", to_json(spec)["family"]}}},
          {"methods", methods},
          {"n_reps", s.n_reps},
          {"seed", s.seed}};
}

int scenario_J(const Scenario& s, int p, int T, int d) {
  const int rule = default_J(p, T, s.j_rule.C, s.j_rule.kappa);
  const int cap = (p - 2) / std::max(d, 1);
  return std::max(4, std::min(rule, cap));
}

SimulatedPanel simulate_replication(const Scenario& s, int p, int T, int rep) {
  const std::uint64_t cell = mix_seed(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(T));
  const std::uint64_t seed = mix_seed(s.seed ^ cell, static_cast<std::uint64_t>(rep));
  Rng rng(seed);
  SimulatedPanel panel;
  if (s.design == Design::Design2) {
    panel = gen_design2(p, T, rng);
  } else {
    panel = gen_calibrated(p, T, CalibratedParams{}, default_calibrated_curves(), rng);
  }
  panel.seed = seed;
  return panel;
}

double MonteCarloResult::mean(int p, int T, Method method, const std::string& metric) const {
  for (const CellSummary& c : summary) {
    if (c.p == p && c.T == T && c.method == method && c.metric == metric) return c.mean;
  }
  return kNaN;
}

MonteCarloResult run_monte_carlo(const Scenario& s, int threads) {
  if (s.n_reps < 1) throw Error(ErrorKind::InvalidInput, "n_reps must be at least 1");
  struct Task {
    int p, T, rep;
  };
  std::vector<Task> tasks;
  for (int p : s.p_grid) {
    for (int T : s.T_grid) {
      for (int rep = 0; rep < s.n_reps; ++rep) tasks.push_back({p, T, rep});
    }
  }

  const std::size_t n_methods = s.methods.size();
  MonteCarloResult result;
  result.scenario = s;
  result.records.resize(tasks.size() * n_methods);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Task& task = tasks[t];
      std::vector<ReplicationRecord> recs(n_methods);
      for (std::size_t k = 0; k < n_methods; ++k) {
        recs[k].p = task.p;
        recs[k].T = task.T;
        recs[k].rep = task.rep;
        recs[k].method = s.methods[k];
        std::fill(std::begin(recs[k].metrics), std::end(recs[k].metrics), kNaN);
      }
      try {
        evaluate(s, simulate_replication(s, task.p, task.T, task.rep), recs);
      } catch (const std::exception& e) {
        for (auto& r : recs) {
          r.ok = false;
          r.error = e.what();
        }
      }
      std::copy(recs.begin(), recs.end(), result.records.begin() + t * n_methods);
    }
  };
  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Aggregate in task order so sums are independent of scheduling.
  for (int p : s.p_grid) {
    for (int T : s.T_grid) {
      for (Method method : s.methods) {
        for (int metric = 0; metric < kMetricCount; ++metric) {
          if (!applies(method, metric)) continue;
          CellSummary c{p, T, method, kMetricNames[metric], 0.0, 0.0, 0, 0};
          std::vector<double> values;
          for (const ReplicationRecord& r : result.records) {
            if (r.p != p || r.T != T || r.method != method) continue;
            if (!r.ok) {
              ++c.n_failed;
              continue;
            }
            values.push_back(r.metrics[metric]);
          }
          c.n_ok = static_cast<int>(values.size());
          if (values.empty()) {
            c.mean = c.sd = kNaN;
            result.summary.push_back(c);
            continue;
          }
          double sum = 0.0;
          for (double v : values) sum += v;
          c.mean = sum / static_cast<double>(values.size());
          double ss = 0.0;
          for (double v : values) ss += (v - c.mean) * (v - c.mean);
          c.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
          result.summary.push_back(c);
        }
      }
    }
  }
  return result;
}

}  // namespace ppca
