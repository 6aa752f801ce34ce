// ppca: command-line driver for projected-PCA fitting, specification tests,
// factor-count selection and the simulation benchmarks.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "ppca/basis.hpp"
#include "ppca/csv.hpp"
#include "ppca/error.hpp"
#include "ppca/estimator.hpp"
#include "ppca/inference.hpp"
#include "ppca/io.hpp"
#include "ppca/monte_carlo.hpp"
#include "ppca/projection.hpp"

#ifndef PPCA_VERSION
#define PPCA_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ppca;

namespace {

[[noreturn]] void input_error(const std::string& msg) { throw Error(ErrorKind::InvalidInput, msg); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) input_error(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) input_error(path.string() + ": cannot write file");
  out << text;
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    input_error(path.string() + ": " + e.what());
  }
}

std::string sha256_file(const fs::path& path) {
  const std::string data = read_text(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    input_error(path.string() + ": checksum failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

// Seed override from the environment; empty when unset.
std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("PPCA_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(s);
  } catch (const std::exception&) {
    input_error(std::string("PPCA_SEED must be a non-negative integer, got '") + v + "'");
  }
}

struct Manifest {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  json checksums = json::object();
  json outputs = json::object();

  void add_input(const std::string& path) { checksums[path] = sha256_file(path); }

  void write(const fs::path& path) const {
    const json j = {{"command", command},     {"config", config},
                    {"seed", seed},           {"tool_version", PPCA_VERSION},
                    {"timestamp", utc_timestamp()}, {"input_checksums", checksums},
                    {"outputs", outputs}};
    write_text(path, j.dump(2) + "\n");
  }
};

fs::path sibling_manifest(const fs::path& out) {
  fs::path m = out;
  m.replace_extension(".manifest.json");
  return m;
}

// ---------------------------------------------------------------------------
// Panel loading shared by fit / test / select.

struct LoadedPanel {
  PanelData data;
  BasisSpec spec;
  BasisMatrix basis;
};

LoadedPanel load_panel(const json& cfg) {
  LoadedPanel out;
  const std::string y_path = cfg.at("data").get<std::string>();
  const std::string x_path = cfg.at("covariates").get<std::string>();
  out.data.Y = read_csv(y_path).values;
  CsvTable x = read_csv(x_path);
  out.data.X.values = std::move(x.values);
  out.data.X.column_names = std::move(x.header);
  if (out.data.X.values.rows() != out.data.Y.rows()) {
    input_error(x_path + ": has " + std::to_string(out.data.X.values.rows()) + " rows but " + y_path +
                " has " + std::to_string(out.data.Y.rows()));
  }
  if (!out.data.Y.allFinite()) input_error(y_path + ": non-finite values");
  try {
    out.spec = basis_spec_from_json(cfg.at("basis"));
    out.basis = build_basis(out.data.X, out.spec);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidSpec || e.kind() == ErrorKind::ZeroVariance) {
      input_error(x_path + ": " + e.what());
    }
    throw;
  }
  for (const auto& w : out.basis.warnings) std::cerr << "ppca: warning: " << w << "\n";
  return out;
}

// K from the config: an integer, or "auto" for projected eigenvalue-ratio selection.
int resolve_k(const json& k, const PanelData& data, const Projector& proj, const BasisLayout& layout,
              json& outputs) {
  if (k.is_string() && k.get<std::string>() == "auto") {
    const SelectionResult sel = select_k(data.Y, &proj, static_cast<int>(layout.columns()));
    outputs["K_hat"] = sel.K_hat;
    outputs["selection"] = to_json(sel);
    return sel.K_hat;
  }
  if (k.is_number_integer() && k.get<int>() >= 1) return k.get<int>();
  input_error("--k must be a positive integer or 'auto'");
}

void record_inputs(Manifest& m, const json& cfg) {
  m.add_input(cfg.at("data").get<std::string>());
  m.add_input(cfg.at("covariates").get<std::string>());
}

// ---------------------------------------------------------------------------
// Commands. Each takes the fully resolved config so that `rerun` can replay it.

void run_fit(const json& cfg) {
  const LoadedPanel panel = load_panel(cfg);
  const Projector proj(panel.basis.values);
  Manifest m{"fit", cfg};
  const int K = resolve_k(cfg.at("k"), panel.data, proj, panel.basis.layout, m.outputs);
  const FitResult fit = fit_projected_pca(panel.data, proj, K);
  const fs::path out = cfg.at("out").get<std::string>();
  m.outputs["fit"] = write_fit_bundle(out, fit, panel.basis.layout);
  std::vector<std::string> header = {"covariate", "x"};
  for (const auto& g : numbered("g", K)) header.push_back(g);
  write_csv(out / "curves.csv", sample_curves(fit, panel.basis.layout, panel.data.X, 200), header);
  for (const auto& w : fit.warnings) std::cerr << "ppca: warning: " << w << "\n";
  record_inputs(m, cfg);
  m.write(out / "manifest.json");
}

void run_test(const json& cfg) {
  const LoadedPanel panel = load_panel(cfg);
  const Projector proj(panel.basis.values);
  Manifest m{"test", cfg};
  const int K = resolve_k(cfg.at("k"), panel.data, proj, panel.basis.layout, m.outputs);
  const std::string which = cfg.at("which").get<std::string>();
  json results = json::object();
  if (which == "g" || which == "both") results["g"] = to_json(test_g_zero(panel.data.Y, proj, K));
  if (which == "gamma" || which == "both") {
    results["gamma"] = to_json(test_gamma_zero(panel.data.Y, proj, K));
  }
  if (results.empty()) input_error("--which must be g, gamma or both");
  const fs::path out = cfg.at("out").get<std::string>();
  write_text(out, results.dump(2) + "\n");
  record_inputs(m, cfg);
  m.write(sibling_manifest(out));
}

void run_select(const json& cfg) {
  const LoadedPanel panel = load_panel(cfg);
  const Projector proj(panel.basis.values);
  const SelectionResult sel =
      select_k(panel.data.Y, &proj, static_cast<int>(panel.basis.layout.columns()));
  for (const auto& w : sel.warnings) std::cerr << "ppca: warning: " << w << "\n";
  const fs::path out = cfg.at("out").get<std::string>();
  write_text(out, to_json(sel).dump(2) + "\n");
  Manifest m{"select", cfg};
  record_inputs(m, cfg);
  m.write(sibling_manifest(out));
}

void run_simulate(const json& cfg) {
  const Scenario s = scenario_from_json(cfg.at("scenario"));
  const int p = cfg.value("p", s.p_grid.front());
  const int T = cfg.value("T", s.T_grid.front());
  const int rep = cfg.value("rep", 0);
  if (p < 2 || T < 2 || rep < 0) input_error("simulate needs p >= 2, T >= 2 and rep >= 0");
  const SimulatedPanel panel = simulate_replication(s, p, T, rep);
  const fs::path out = cfg.at("out").get<std::string>();
  write_panel(out, panel);
  Manifest m{"simulate", cfg, s.seed};
  m.outputs = {{"p", p}, {"T", T}, {"rep", rep}, {"replication_seed", panel.seed}};
  m.write(out / "manifest.json");
}

void run_benchmark(const json& cfg) {
  const Scenario s = scenario_from_json(cfg.at("scenario"));
  const int threads = cfg.value("threads", 1);
  if (threads < 1) input_error("--threads must be at least 1");
  const MonteCarloResult r = run_monte_carlo(s, threads);
  const fs::path out = cfg.at("out").get<std::string>();
  fs::create_directories(out);
  write_text(out / "summary.csv", summary_csv(r));
  write_text(out / "raw.csv", raw_csv(r));
  int failed = 0;
  for (const auto& rec : r.records) failed += rec.ok ? 0 : 1;
  Manifest m{"benchmark", cfg, s.seed};
  m.outputs = {{"records", r.records.size()}, {"failed", failed}};
  m.write(out / "manifest.json");
}

// Scenario JSON with the PPCA_SEED override applied.
json load_scenario(const std::string& path) {
  json j = read_json(path);
  if (const auto seed = env_seed()) j["seed"] = *seed;
  scenario_from_json(j);  // validate before anything is written
  return j;
}

json load_basis(const std::string& path) {
  if (path.empty()) return to_json(BasisSpec{});
  const json j = read_json(path);
  try {
    return to_json(basis_spec_from_json(j));
  } catch (const Error& e) {
    input_error(path + ": " + e.what());
  }
}

json parse_k(const std::string& k) {
  if (k == "auto") return k;
  try {
    std::size_t used = 0;
    const int v = std::stoi(k, &used);
    if (used == k.size() && v >= 1) return v;
  } catch (const std::exception&) {
  }
  input_error("--k must be a positive integer or 'auto', got '" + k + "'");
}

void dispatch(const std::string& command, const json& cfg) {
  if (command == "fit") return run_fit(cfg);
  if (command == "test") return run_test(cfg);
  if (command == "select") return run_select(cfg);
  if (command == "simulate") return run_simulate(cfg);
  if (command == "benchmark") return run_benchmark(cfg);
  input_error("unknown command '" + command + "' in manifest");
}

void rerun(const std::string& manifest_path, const std::string& out_override) {
  const json m = read_json(manifest_path);
  if (!m.contains("command") || !m.contains("config")) {
    input_error(manifest_path + ": not a run manifest");
  }
  const json checksums = m.value("input_checksums", json::object());
  for (const auto& [path, digest] : checksums.items()) {
    if (sha256_file(path) != digest.get<std::string>()) {
      input_error(path + ": checksum differs from " + manifest_path);
    }
  }
  json cfg = m.at("config");
  if (!out_override.empty()) cfg["out"] = absolute(out_override);
  dispatch(m.at("command").get<std::string>(), cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected principal component analysis for semiparametric factor models"};
  app.set_version_flag("--version", PPCA_VERSION);
  app.require_subcommand(1);

  std::string data, covariates, basis, out, k = "auto", which = "both", scenario, manifest;
  int threads = 1;
  int sim_p = 0, sim_T = 0, sim_rep = 0;

  auto add_panel = [&](CLI::App* sub, bool with_k) {
    sub->add_option("--data", data, "p x T panel CSV (units in rows)")->required();
    sub->add_option("--covariates", covariates, "p x d covariate CSV")->required();
    sub->add_option("--basis", basis, "basis spec JSON (default: cubic B-splines, J = 8)");
    if (with_k) sub->add_option("--k", k, "number of factors or 'auto'")->capture_default_str();
  };

  auto* fit = app.add_subcommand("fit", "estimate factors, loadings and loading curves");
  add_panel(fit, true);
  fit->add_option("--out", out, "output directory")->required();

  auto* test = app.add_subcommand("test", "test G = 0 and/or Gamma = 0");
  add_panel(test, true);
  test->add_option("--which", which, "g, gamma or both")
      ->check(CLI::IsMember({"g", "gamma", "both"}))
      ->capture_default_str();
  test->add_option("--out", out, "results JSON")->required();

  auto* select = app.add_subcommand("select", "estimate the number of factors");
  add_panel(select, false);
  select->add_option("--out", out, "results JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "write one simulated panel");
  simulate->add_option("--scenario", scenario, "scenario JSON")->required();
  simulate->add_option("--out", out, "output directory")->required();
  simulate->add_option("--p", sim_p, "units (default: first of p_grid)");
  simulate->add_option("--T", sim_T, "periods (default: first of T_grid)");
  simulate->add_option("--rep", sim_rep, "replication index")->capture_default_str();

  auto* bench = app.add_subcommand("benchmark", "run a Monte Carlo scenario");
  bench->add_option("--scenario", scenario, "scenario JSON")->required();
  bench->add_option("--out", out, "output directory")->required();
  bench->add_option("--threads", threads, "worker threads")->capture_default_str();

  auto* re = app.add_subcommand("rerun", "replay a run manifest");
  re->add_option("--manifest", manifest, "manifest.json written by an earlier run")->required();
  re->add_option("--out", out, "write outputs here instead of the recorded location");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (re->parsed()) {
      rerun(manifest, out);
      return 0;
    }
    json cfg;
    std::string command;
    if (fit->parsed() || test->parsed() || select->parsed()) {
      command = fit->parsed() ? "fit" : (test->parsed() ? "test" : "select");
      cfg = {{"data", absolute(data)},
             {"covariates", absolute(covariates)},
             {"basis", load_basis(basis)},
             {"out", absolute(out)}};
      if (!select->parsed()) cfg["k"] = parse_k(k);
      if (test->parsed()) cfg["which"] = which;
    } else {
      command = simulate->parsed() ? "simulate" : "benchmark";
      cfg = {{"scenario", load_scenario(scenario)}, {"out", absolute(out)}};
      if (simulate->parsed()) {
        if (sim_p > 0) cfg["p"] = sim_p;
        if (sim_T > 0) cfg["T"] = sim_T;
        cfg["rep"] = sim_rep;
      } else {
        cfg["threads"] = threads;
      }
    }
    dispatch(command, cfg);
    return 0;
  } catch (const Error& e) {
    std::cerr << "ppca: error: " << e.what() << "\n";
    return e.is_numerical() ? 3 : 2;
  } catch (const json::exception& e) {
    std::cerr << "ppca: error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "ppca: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ppca: error: " << e.what() << "\n";
    return 2;
  }
}
