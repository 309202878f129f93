#include "prism/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace prism {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# " << M.rows() << ',' << M.cols() << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  long want_rows = -1;
  long want_cols = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') {
      // Optional "# rows,cols" header before the first data row.
      if (rows.empty() && want_rows < 0 &&
          std::sscanf(line.c_str(), "# %ld , %ld", &want_rows, &want_cols) != 2) {
        want_rows = want_cols = -1;
      }
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos) {
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell +
                      "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path.string() + ": empty matrix");
  if (want_rows >= 0 && (static_cast<long>(rows.size()) != want_rows ||
                         static_cast<long>(rows.front().size()) != want_cols)) {
    throw IoError(path.string() + ": header declares " + std::to_string(want_rows) + "x" +
                  std::to_string(want_cols) + " but the file holds " +
                  std::to_string(rows.size()) + "x" + std::to_string(rows.front().size()));
  }
  Eigen::MatrixXd M(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  }
  return M;
}

void save_dataset(const fs::path& dir, const Dataset& ds) {
  ds.validate();
  fs::create_directories(dir);
  write_matrix_csv(dir / "Y.csv", ds.Y);
  json j;
  j["Y"] = "Y.csv";
  if (ds.truth) {
    write_matrix_csv(dir / "A0.csv", ds.truth->A0);
    write_matrix_csv(dir / "S0.csv", ds.truth->S0);
    j["truth"] = {{"A0", "A0.csv"}, {"S0", "S0.csv"}, {"sigma", ds.truth->sigma}};
  }
  json meta = json::object();
  if (ds.meta.seed) meta["seed"] = *ds.meta.seed;
  if (ds.meta.snr_db) meta["snr_db"] = *ds.meta.snr_db;
  if (!ds.meta.snr_convention.empty()) meta["snr_convention"] = ds.meta.snr_convention;
  j["meta"] = meta;
  write_json(dir / "dataset.json", j);
}

Dataset load_dataset(const fs::path& path) {
  fs::path descriptor = path;
  if (fs::is_directory(path)) descriptor = path / "dataset.json";
  if (!fs::exists(descriptor)) throw IoError("no dataset at " + path.string());
  Dataset ds;
  if (descriptor.extension() != ".json") {
    ds.Y = read_matrix_csv(descriptor);
    ds.validate();
    return ds;
  }
  const fs::path base = descriptor.parent_path();
  try {
    const json j = read_json(descriptor);
    ds.Y = read_matrix_csv(base / j.at("Y").get<std::string>());
    if (j.contains("truth")) {
      const json& t = j.at("truth");
      GroundTruth truth;
      truth.A0 = read_matrix_csv(base / t.at("A0").get<std::string>());
      truth.S0 = read_matrix_csv(base / t.at("S0").get<std::string>());
      truth.sigma = t.at("sigma").get<double>();
      ds.truth = std::move(truth);
    }
    if (j.contains("meta")) {
      const json& m = j.at("meta");
      if (m.contains("seed")) ds.meta.seed = m.at("seed").get<std::uint64_t>();
      if (m.contains("snr_db")) ds.meta.snr_db = m.at("snr_db").get<double>();
      if (m.contains("snr_convention")) {
        ds.meta.snr_convention = m.at("snr_convention").get<std::string>();
      }
    }
  } catch (const json::exception& e) {
    throw IoError(descriptor.string() + ": " + e.what());
  }
  ds.validate();
  return ds;
}

json to_json(const SolverReport& r) {
  json j;
  j["method"] = r.method;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["wall_seconds"] = r.wall_seconds;
  j["A"] = matrix_json(r.A);
  j["rel_change"] = r.rel_change;
  if (!r.mse.empty()) j["mse"] = r.mse;
  if (r.method == "isa") {
    j["acceptance_rate"] = r.acceptance_rate;
    j["loglik"] = r.loglik;
    j["empty_batches"] = r.empty_batches;
    j["acceptance_collapse"] = r.acceptance_collapse;
  }
  if (r.method == "via") {
    j["objective"] = r.objective;
    j["eta"] = {{"min", r.eta_min}, {"median", r.eta_median}, {"max", r.eta_max}};
    j["admm_iterations"] = {{"mean", r.admm_iters_mean}, {"max", r.admm_iters_max}};
    j["used_pinv"] = r.used_pinv;
  }
  j["warnings"] = r.warnings;
  j["notes"] = r.notes;
  return j;
}

json to_json(const MseResult& m) {
  return {{"value", m.value}, {"permutation", m.permutation}};
}

json to_json(const SadResult& s) {
  const std::vector<double> angles(s.angles_deg.begin(), s.angles_deg.end());
  return {{"angles_deg", angles}, {"mean_deg", s.mean_deg}, {"permutation", s.permutation}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace prism
