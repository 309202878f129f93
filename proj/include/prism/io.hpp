#pragma once

// Plain-text persistence: matrices as CSV with a "# rows,cols" header line
// followed by one matrix row per line (observations as columns; headerless
// files are accepted), datasets as a JSON descriptor next to their CSV files,
// reports as JSON.

#include <Eigen/Dense>

#include <filesystem>
#include <string>

#include "json.hpp"
#include "prism/errors.hpp"
#include "prism/eval.hpp"
#include "prism/model.hpp"
#include "prism/report.hpp"

namespace prism {

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

// Writes dir/dataset.json, dir/Y.csv and, with truth, dir/A0.csv and dir/S0.csv.
void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
// Accepts a dataset directory, its dataset.json, or a bare Y csv (no truth).
Dataset load_dataset(const std::filesystem::path& path);

nlohmann::json to_json(const SolverReport& report);
nlohmann::json to_json(const MseResult& m);
nlohmann::json to_json(const SadResult& s);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace prism
