#include "ppca/io.hpp"

#include <cmath>

#include "ppca/csv.hpp"
#include "ppca/error.hpp"

namespace ppca {

namespace {

std::string cell(double v) { return std::isnan(v) ? std::string("NA") : format_double(v); }

}  // namespace

nlohmann::json write_fit_bundle(const std::filesystem::path& dir, const FitResult& fit,
                                const BasisLayout& layout) {
  std::filesystem::create_directories(dir);
  const auto cols = numbered("f", fit.K);
  write_csv(dir / "factors.csv", fit.F_hat, cols);
  write_csv(dir / "loadings_lambda.csv", fit.Lambda_hat, cols);
  if (fit.method == FitMethod::ProjectedPCA) {
    write_csv(dir / "loadings_g.csv", fit.G_hat, cols);
    write_csv(dir / "loadings_gamma.csv", fit.Gamma_hat, cols);
    write_csv(dir / "coefficients.csv", fit.B_hat, cols);
  }
  std::vector<double> eig(fit.eigvals.data(), fit.eigvals.data() + fit.eigvals.size());
  return {{"K", fit.K},
          {"m", layout.columns()},
          {"eigenvalues", eig},
          {"method", to_string(fit.method)},
          {"spec", to_json(layout.spec)},
          {"warnings", fit.warnings}};
}

Matrix sample_curves(const FitResult& fit, const BasisLayout& layout, const CovariateMatrix& X,
                     int points) {
  const Eigen::Index d = X.dims();
  Matrix out(d * points, 2 + fit.K);
  const Vector centre = X.values.colwise().mean().transpose();
  for (Eigen::Index l = 0; l < d; ++l) {
    const double lo = X.values.col(l).minCoeff();
    const double hi = X.values.col(l).maxCoeff();
    for (int g = 0; g < points; ++g) {
      const double x = points == 1 ? lo : lo + (hi - lo) * g / (points - 1);
      Vector point = centre;
      point(l) = x;
      const CurveValues v = eval_curves(fit.B_hat, layout, point);
      const Eigen::Index row = l * points + g;
      out(row, 0) = static_cast<double>(l + 1);
      out(row, 1) = x;
      out.row(row).tail(fit.K) = v.components.row(l);
    }
  }
  return out;
}

void write_panel(const std::filesystem::path& dir, const SimulatedPanel& panel) {
  std::filesystem::create_directories(dir);
  const Eigen::Index K = panel.F_true.cols();
  write_csv(dir / "Y.csv", panel.data.Y, numbered("t", panel.data.periods()));
  auto names = panel.data.X.column_names;
  if (static_cast<Eigen::Index>(names.size()) != panel.data.X.dims()) {
    names = numbered("x", panel.data.X.dims());
  }
  write_csv(dir / "X.csv", panel.data.X.values, names);
  write_csv(dir / "F_true.csv", panel.F_true, numbered("f", K));
  write_csv(dir / "G_true.csv", panel.G_true, numbered("f", K));
  write_csv(dir / "Gamma_true.csv", panel.Gamma_true, numbered("f", K));
}

SimulatedPanel read_panel(const std::filesystem::path& dir) {
  SimulatedPanel panel;
  panel.data.Y = read_csv(dir / "Y.csv").values;
  CsvTable x = read_csv(dir / "X.csv");
  panel.data.X.values = std::move(x.values);
  panel.data.X.column_names = std::move(x.header);
  panel.F_true = read_csv(dir / "F_true.csv").values;
  panel.G_true = read_csv(dir / "G_true.csv").values;
  panel.Gamma_true = read_csv(dir / "Gamma_true.csv").values;
  panel.K_true = static_cast<int>(panel.F_true.cols());
  return panel;
}

std::string summary_csv(const MonteCarloResult& result) {
  std::string out = "design,p,T,method,metric,mean,sd,n_ok,n_failed\n";
  const char* design = to_string(result.scenario.design);
  for (const CellSummary& c : result.summary) {
    out += std::string(design) + ',' + std::to_string(c.p) + ',' + std::to_string(c.T) + ',' +
           to_string(c.method) + ',' + c.metric + ',' + cell(c.mean) + ',' + cell(c.sd) + ',' +
           std::to_string(c.n_ok) + ',' + std::to_string(c.n_failed) + '\n';
  }
  return out;
}

std::string raw_csv(const MonteCarloResult& result) {
  std::string out = "design,p,T,rep,method,ok";
  for (const char* name : kMetricNames) out += std::string(",") + name;
  out += ",error\n";
  const char* design = to_string(result.scenario.design);
  for (const ReplicationRecord& r : result.records) {
    out += std::string(design) + ',' + std::to_string(r.p) + ',' + std::to_string(r.T) + ',' +
           std::to_string(r.rep) + ',' + to_string(r.method) + ',' + (r.ok ? "1" : "0");
    for (double v : r.metrics) out += ',' + cell(v);
    std::string err = r.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out += ',' + err + '\n';
  }
  return out;
}

}  // namespace ppca
