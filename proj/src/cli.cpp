#include "prism/cli.hpp"

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prism/config.hpp"
#include "prism/dimred.hpp"
#include "prism/errors.hpp"
#include "prism/eval.hpp"
#include "prism/geometry.hpp"
#include "prism/io.hpp"
#include "prism/pipeline.hpp"
#include "prism/rng.hpp"
#include "prism/via.hpp"

namespace prism {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Failure inside a solver run, as opposed to bad input.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string dataset;
  std::string method;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> snr_db;
  std::optional<int> trials;
  std::string grid;
  std::string estimate;
  std::string kind = "svmin";
  std::string B_path;
  std::string c_path;
  double lambda = 1.0;
};

RunConfig resolve_config(const Options& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  for (const std::string& a : o.overrides) apply_assignment(cfg, a);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.method.empty()) {
    cfg.fit.method = o.method;
    std::vector<std::string> methods;
    std::stringstream ss(o.method);
    for (std::string m; std::getline(ss, m, ',');) methods.push_back(m);
    cfg.sweep.methods = methods;
    if (methods.size() > 1) cfg.fit.method = methods.front();
  }
  if (o.snr_db) cfg.synth.snr_db = *o.snr_db;
  if (o.trials) cfg.sweep.trials = *o.trials;
  if (!o.grid.empty()) apply_assignment(cfg, "sweep.grid=" + o.grid);
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  save_config(dir / "config.json", cfg);
  return dir;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(o);
  const fs::path dir = prepare_output(cfg);
  const VertexMatrix A0 = random_vertices(cfg.synth.M, cfg.synth.N, derive_seed(cfg.seed, 1));
  Dataset ds = synthesize(A0, snr_to_sigma(A0, cfg.synth.snr_db), cfg.synth.T,
                          derive_seed(cfg.seed, 2));
  ds.meta.snr_db = cfg.synth.snr_db;
  ds.meta.snr_convention = kSnrConvention;
  save_dataset(dir, ds);
  err << "synth: wrote " << ds.size() << " points (M=" << ds.dim() << ", N=" << A0.cols()
      << ", sigma=" << ds.truth->sigma << ") to " << dir.string() << "\n";
  out << (dir / "dataset.json").string() << "\n";
  return kExitOk;
}

json metrics_json(const VertexMatrix& A0, const VertexMatrix& A) {
  return {{"mse", to_json(mse(A0, A))}, {"sad", to_json(sad(A0, A))}};
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.dataset.empty()) throw ConfigError("fit requires --dataset");
  const RunConfig cfg = resolve_config(o);
  const Dataset ds = load_dataset(o.dataset);
  const fs::path dir = prepare_output(cfg);
  err << "fit: method " << cfg.fit.method << " on " << ds.size() << " points\n";
  FitOutcome fit;
  try {
    fit = fit_dataset(ds, cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw SolverFailure(e.what());
  }
  json report = to_json(fit.report);
  report["sigma"] = fit.sigma;
  if (ds.truth) {
    report["metrics"] = metrics_json(ds.truth->A0, fit.A);
    report["metrics_init"] = metrics_json(ds.truth->A0, fit.A_init);
  }
  write_json(dir / "report.json", report);
  write_matrix_csv(dir / "A_hat.csv", fit.A);
  write_matrix_csv(dir / "A_init.csv", fit.A_init);
  for (const std::string& w : fit.report.warnings) err << "warning: " << w << "\n";
  out << "status " << to_string(fit.report.status) << ", iterations " << fit.report.iterations;
  if (ds.truth) out << ", mse " << mse(ds.truth->A0, fit.A).value;
  out << "\n";
  return fit.report.status == SolverStatus::Aborted ? kExitSolverFailure : kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
  if (o.dataset.empty() || o.estimate.empty()) {
    throw ConfigError("eval requires --dataset and --estimate");
  }
  const Dataset ds = load_dataset(o.dataset);
  if (!ds.truth) throw ConfigError("eval needs a dataset with ground truth");
  const VertexMatrix A = read_matrix_csv(o.estimate);
  const MseResult m = mse(ds.truth->A0, A);
  const SadResult s = sad(ds.truth->A0, A);
  out << format_metrics_table({fs::path(o.estimate).filename().string()}, {m.value}, {s.mean_deg});
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_json(fs::path(o.out) / "metrics.json", metrics_json(ds.truth->A0, A));
  }
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(o);
  const fs::path dir = prepare_output(cfg);
  err << "sweep: " << cfg.sweep.grid.size() << " grid values x " << cfg.sweep.trials
      << " trials x " << cfg.sweep.methods.size() << " methods\n";
  std::vector<SweepRow> rows;
  try {
    rows = run_sweep(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw SolverFailure(e.what());
  }
  write_sweep_csv(dir / "sweep.csv", rows);
  out << (dir / "sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_objective(const Options& o, std::ostream& out, std::ostream&) {
  if (o.dataset.empty()) throw ConfigError("objective requires --dataset");
  const RunConfig cfg = resolve_config(o);
  const Dataset ds = load_dataset(o.dataset);
  const bool polyhedral = !o.B_path.empty() || !o.c_path.empty();
  if (polyhedral && (o.B_path.empty() || o.c_path.empty())) {
    throw ConfigError("--B and --c must be given together");
  }
  if (!polyhedral && o.estimate.empty()) throw ConfigError("objective requires --estimate or --B/--c");
  std::optional<PolyhedralForm> P;
  VertexMatrix A;
  if (polyhedral) {
    const Eigen::MatrixXd c = read_matrix_csv(o.c_path);
    if (c.cols() != 1) throw ShapeError("--c must be a single column");
    P = PolyhedralForm::from(read_matrix_csv(o.B_path), c.col(0));
    A = polyhedron_to_simplex(*P);
  } else {
    A = read_matrix_csv(o.estimate);
  }
  Eigen::MatrixXd Y = ds.Y;
  json result = {{"kind", o.kind}};
  const bool needs_square = o.kind != "generalized" && o.kind != "via";
  if (needs_square && !P && A.rows() > A.cols() - 1) {
    // Evaluate in the principal chart of the data.
    const Reduction red = reduce(ds.Y, A.cols());
    Y = red.Z;
    A = red.chart.Q.transpose() * (A.colwise() - red.chart.mu);
    result["coordinates"] = "reduced";
  }
  auto polyhedron = [&]() -> PolyhedralForm { return P ? *P : simplex_to_polyhedron(A); };
  auto sigma = [&]() {
    if (cfg.fit.sigma) return *cfg.fit.sigma;
    if (ds.truth && ds.truth->sigma > 0.0) return ds.truth->sigma;
    throw ConfigError("objective '" + o.kind + "' needs fit.sigma or a noisy ground truth");
  };
  if (o.kind == "svmin") {
    const auto v = noiseless_svmin_objective(A, Y);
    result["feasible"] = v.has_value();
    result["value"] = v ? json(*v) : json(nullptr);
  } else if (o.kind == "edge") {
    result["value"] = edge_smooth_objective(A, Y, o.lambda);
  } else if (o.kind == "generalized") {
    result["value"] = generalized_edge_smooth(A, Y, o.lambda, sigma());
  } else if (o.kind == "sisal") {
    result["value"] = sisal_objective(polyhedron(), Y, o.lambda);
  } else if (o.kind == "chance") {
    result["value"] = chance_objective(polyhedron(), Y, sigma());
  } else if (o.kind == "via") {
    // Per-point variational optimum at A, summed.
    const double s = sigma();
    double total = 0.0;
    for (Eigen::Index t = 0; t < ds.size(); ++t) {
      total += solve_variational(A, ds.Y.col(t), s, cfg.via).objective;
    }
    result["value"] = total;
  } else {
    throw ConfigError("unknown objective kind '" + o.kind + "'");
  }
  out << o.kind << " " << result["value"].dump() << "\n";
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_json(fs::path(o.out) / "objective.json", result);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic simplex component analysis"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON or key=value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", o.overrides, "Override a config key (key=value), repeatable");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Output directory");
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  common(synth);
  synth->add_option("--snr-db", o.snr_db, "Signal-to-noise ratio in dB");

  CLI::App* fit = app.add_subcommand("fit", "Estimate vertices from a dataset");
  common(fit);
  fit->add_option("--dataset", o.dataset, "Dataset directory, dataset.json or Y csv")->required();
  fit->add_option("--method", o.method, "spa, isa or via");

  CLI::App* eval = app.add_subcommand("eval", "Compare an estimate with the ground truth");
  eval->add_option("--dataset", o.dataset, "Dataset with ground truth")->required();
  eval->add_option("--estimate", o.estimate, "Estimated vertex matrix csv")->required();
  eval->add_option("--out", o.out, "Directory for metrics.json");

  CLI::App* sweep = app.add_subcommand("sweep", "Synthetic trials over a grid of T or SNR");
  common(sweep);
  sweep->add_option("--method", o.method, "Comma-separated methods");
  sweep->add_option("--snr-db", o.snr_db, "SNR when sweeping T");
  sweep->add_option("--trials", o.trials, "Trials per grid value");
  sweep->add_option("--grid", o.grid, "Comma-separated grid values");

  CLI::App* objective = app.add_subcommand("objective", "Evaluate a geometry objective");
  common(objective);
  objective->add_option("--dataset", o.dataset, "Dataset")->required();
  objective->add_option("--estimate", o.estimate, "Vertex matrix csv");
  objective->add_option("--B", o.B_path, "Polyhedral normals csv");
  objective->add_option("--c", o.c_path, "Polyhedral offsets csv (one column)");
  objective->add_option("--kind", o.kind, "svmin, edge, generalized, sisal, chance or via")
      ->check(CLI::IsMember({"svmin", "edge", "generalized", "sisal", "chance", "via"}));
  objective->add_option("--lambda", o.lambda, "Regularisation weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out, err);
    if (fit->parsed()) return cmd_fit(o, out, err);
    if (eval->parsed()) return cmd_eval(o, out, err);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
    if (objective->parsed()) return cmd_objective(o, out, err);
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  }
  return kExitUserError;
}

}  // namespace prism
