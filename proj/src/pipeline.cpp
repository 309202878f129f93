#include "prism/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "prism/errors.hpp"
#include "prism/eval.hpp"
#include "prism/init.hpp"
#include "prism/isa.hpp"
#include "prism/mathcore.hpp"
#include "prism/parallel.hpp"
#include "prism/rng.hpp"
#include "prism/via.hpp"

namespace prism {

namespace {

double noiseless_sigma(const Eigen::MatrixXd& Y) {
  const Eigen::VectorXd mean = Y.rowwise().mean();
  const double rms = std::sqrt((Y.colwise() - mean).squaredNorm() / static_cast<double>(Y.cols()));
  return kNoiselessSigmaFraction * std::max(rms, 1e-12);
}

}  // namespace

FitOutcome fit_dataset(const Dataset& ds, const RunConfig& cfg) {
  ds.validate();
  Eigen::Index N = cfg.fit.N;
  if (N == 0) {
    if (!ds.truth) throw ConfigError("fit.N is required for data without ground truth");
    N = ds.truth->A0.cols();
  }
  FitOutcome out;
  std::vector<std::string> warnings;
  if (cfg.fit.sigma) {
    out.sigma = *cfg.fit.sigma;
  } else if (ds.truth) {
    out.sigma = ds.truth->sigma;
  } else {
    throw ConfigError("fit.sigma is required for data without ground truth");
  }
  if (!(out.sigma > 0.0) && cfg.fit.method != "spa") {
    out.sigma = noiseless_sigma(ds.Y);
    warnings.push_back("noiseless data: using sigma = " + std::to_string(out.sigma));
  }

  Eigen::MatrixXd work = ds.Y;
  if (cfg.fit.dimred && ds.Y.rows() > N - 1) {
    Reduction red = reduce(ds.Y, N);
    work = std::move(red.Z);
    out.chart = std::move(red.chart);
  }
  auto to_ambient = [&](const VertexMatrix& A) -> VertexMatrix {
    return out.chart ? lift(A, *out.chart) : A;
  };

  const PurePixelResult init = pure_pixel_init(work, N);
  out.A_init = to_ambient(init.A);
  MseProbe probe;
  if (ds.truth) {
    const VertexMatrix A0 = ds.truth->A0;
    probe = [A0, to_ambient](const VertexMatrix& A) { return mse(A0, to_ambient(A)).value; };
  }

  if (cfg.fit.method == "spa") {
    out.report.method = "spa";
    out.report.A = init.A;
    out.report.status = SolverStatus::Converged;
  } else if (cfg.fit.method == "isa") {
    IsaConfig icfg = cfg.isa;
    icfg.seed = cfg.seed;
    out.report = isa_prism(work, icfg, init.A, out.sigma, probe);
  } else if (cfg.fit.method == "via") {
    out.report = via_prism(work, cfg.via, init.A, out.sigma, probe);
  } else {
    throw ConfigError("unknown method '" + cfg.fit.method + "'");
  }
  out.report.warnings.insert(out.report.warnings.begin(), warnings.begin(), warnings.end());
  if (out.chart) out.report.notes["coordinates"] = "A is in the reduced (N-1)-dimensional chart";
  out.report.notes["init_space"] = out.chart ? "reduced" : "ambient";
  out.report.notes["snr_convention"] =
      ds.meta.snr_convention.empty() ? kSnrConvention : ds.meta.snr_convention;
  out.A = to_ambient(out.report.A);
  return out;
}

VertexMatrix random_vertices(Eigen::Index M, Eigen::Index N, std::uint64_t seed) {
  if (M < N - 1 || N < 2) throw ShapeError("random_vertices: need N >= 2 and M >= N - 1");
  VertexMatrix A(M, N);
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng = Rng::stream(seed, attempt);
    for (Eigen::Index j = 0; j < N; ++j) {
      for (Eigen::Index i = 0; i < M; ++i) A(i, j) = rng.uniform();
    }
    if (affinely_independent(A)) return A;
  }
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  cfg.validate();
  const auto& grid = cfg.sweep.grid;
  const int trials = cfg.sweep.trials;
  const auto& methods = cfg.sweep.methods;
  const std::size_t per_trial = methods.size();
  std::vector<SweepRow> rows(grid.size() * static_cast<std::size_t>(trials) * per_trial);

  parallel_for(grid.size() * static_cast<std::size_t>(trials), [&](std::size_t job) {
    const std::size_t g = job / static_cast<std::size_t>(trials);
    const int trial = static_cast<int>(job % static_cast<std::size_t>(trials));
    const std::uint64_t seed = derive_seed(cfg.seed, g, static_cast<std::uint64_t>(trial));
    int T = cfg.synth.T;
    double snr = cfg.synth.snr_db;
    if (cfg.sweep.variable == "T") {
      T = static_cast<int>(grid[g]);
    } else {
      snr = grid[g];
    }
    const VertexMatrix A0 = random_vertices(cfg.synth.M, cfg.synth.N, derive_seed(seed, 1));
    Dataset ds = synthesize(A0, snr_to_sigma(A0, snr), T, derive_seed(seed, 2));
    for (std::size_t m = 0; m < per_trial; ++m) {
      RunConfig run = cfg;
      run.fit.method = methods[m];
      run.fit.N = 0;
      run.fit.sigma.reset();
      run.seed = derive_seed(seed, 3);
      const FitOutcome fit = fit_dataset(ds, run);
      SweepRow& row = rows[job * per_trial + m];
      row.variable = cfg.sweep.variable;
      row.value = grid[g];
      row.trial = trial;
      row.seed = seed;
      row.method = methods[m];
      row.mse = mse(A0, fit.A).value;
    }
  });

  std::map<std::pair<double, std::string>, std::vector<double>> groups;
  for (const SweepRow& r : rows) groups[{r.value, r.method}].push_back(r.mse);
  for (SweepRow& r : rows) {
    const auto& v = groups[{r.value, r.method}];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    r.group_mean = mean;
    r.group_sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "variable,value,trial,seed,method,mse,mean_mse,sd_mse\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%d,%llu,%s,%.17g,%.17g,%.17g\n", r.variable.c_str(),
                  r.value, r.trial, static_cast<unsigned long long>(r.seed), r.method.c_str(),
                  r.mse, r.group_mean, r.group_sd);
    out << buf;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace prism
