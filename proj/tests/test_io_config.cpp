#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "prism/errors.hpp"
#include "prism/config.hpp"
#include "prism/io.hpp"
#include "prism/model.hpp"

using namespace prism;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("prism_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("matrix csv round trip is exact") {
  const fs::path dir = scratch("csv");
  std::mt19937_64 gen(1);
  Eigen::MatrixXd M = oracle::random_matrix(7, 13, gen, -1e5, 1e5);
  M(0, 0) = 1e-300;
  M(1, 1) = -0.1;
  write_matrix_csv(dir / "m.csv", M);
  CHECK(read_matrix_csv(dir / "m.csv") == M);
  std::ifstream in(dir / "m.csv");
  std::string first;
  std::getline(in, first);
  CHECK(first == "# 7,13");
}

TEST_CASE("csv reader accepts headerless files and reports bad input") {
  const fs::path dir = scratch("csvbad");
  write_text(dir / "plain.csv", "1,2,3\r\n4,5,6\n\n");
  CHECK(read_matrix_csv(dir / "plain.csv") == (Eigen::MatrixXd(2, 3) << 1, 2, 3, 4, 5, 6).finished());
  write_text(dir / "ragged.csv", "1,2\n3\n");
  CHECK_THROWS_WITH_AS(read_matrix_csv(dir / "ragged.csv"), doctest::Contains(":2: ragged"), IoError);
  write_text(dir / "word.csv", "1,x\n");
  CHECK_THROWS_WITH_AS(read_matrix_csv(dir / "word.csv"), doctest::Contains("bad number"), IoError);
  write_text(dir / "dims.csv", "# 3,2\n1,2\n3,4\n");
  CHECK_THROWS_WITH_AS(read_matrix_csv(dir / "dims.csv"), doctest::Contains("header declares"), IoError);
  write_text(dir / "empty.csv", "");
  CHECK_THROWS_AS(read_matrix_csv(dir / "empty.csv"), IoError);
  CHECK_THROWS_AS(read_matrix_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("dataset round trip") {
  const fs::path dir = scratch("dataset");
  std::mt19937_64 gen(2);
  Dataset ds = synthesize(oracle::random_matrix(4, 3, gen, 0.0, 1.0), 0.05, 20, 3);
  ds.meta.snr_db = 17.5;
  ds.meta.snr_convention = kSnrConvention;
  save_dataset(dir, ds);
  for (const fs::path& p : {dir, dir / "dataset.json"}) {
    Dataset back = load_dataset(p);
    CHECK(back.Y == ds.Y);
    REQUIRE(back.truth.has_value());
    CHECK(back.truth->A0 == ds.truth->A0);
    CHECK(back.truth->S0 == ds.truth->S0);
    CHECK(back.truth->sigma == ds.truth->sigma);
    CHECK(back.meta.seed == ds.meta.seed);
    CHECK(back.meta.snr_db == ds.meta.snr_db);
    CHECK(back.meta.snr_convention == kSnrConvention);
  }
  Dataset bare = load_dataset(dir / "Y.csv");
  CHECK(bare.Y == ds.Y);
  CHECK_FALSE(bare.truth.has_value());

  write_text(dir / "dataset.json", "{\"truth\": 1}");
  CHECK_THROWS_AS(load_dataset(dir), IoError);
  CHECK_THROWS_AS(load_dataset(dir / "nothing"), IoError);
}

TEST_CASE("report json") {
  SolverReport r;
  r.method = "via";
  r.A = Eigen::MatrixXd::Identity(2, 3);
  r.objective = {3.0, 2.0};
  r.warnings = {"w"};
  auto j = to_json(r);
  CHECK(j["method"] == "via");
  CHECK(j["A"].size() == 2);
  CHECK(j["A"][0].size() == 3);
  CHECK(j["objective"][1] == 2.0);
  CHECK(j.contains("eta"));
  CHECK_FALSE(j.contains("acceptance_rate"));
  r.method = "isa";
  CHECK(to_json(r).contains("acceptance_rate"));
}

TEST_CASE("defaults") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.isa.proposals_per_point == 500);
  CHECK(cfg.via.rho == 0.01);
  CHECK(cfg.via.admm_dual_tol == 0.005);
  CHECK(cfg.via.max_outer_iters == 100);
  CHECK(cfg.isa.max_iters == 100);

  const fs::path dir = scratch("defaults");
  write_text(dir / "empty.json", "{}");
  CHECK(load_config(dir / "empty.json") == RunConfig{});
  write_text(dir / "empty.txt", "# nothing set\n");
  CHECK(load_config(dir / "empty.txt") == RunConfig{});
}

TEST_CASE("config round trip") {
  RunConfig cfg;
  cfg.seed = 123456789012345ULL;
  cfg.output_dir = "elsewhere";
  cfg.synth.N = 7;
  cfg.fit.sigma = 0.25;
  cfg.sweep.grid = {10, 20};
  cfg.sweep.methods = {"isa"};
  cfg.via.rho = 0.02;
  cfg.via.warm_start = false;
  cfg.isa.min_accepted = 3;
  const fs::path dir = scratch("roundtrip");
  save_config(dir / "c.json", cfg);
  CHECK(load_config(dir / "c.json") == cfg);
  CHECK(config_from_json(config_to_json(cfg)) == cfg);

  // Every key written as "key = value" reads back to the same configuration.
  const nlohmann::json j = config_to_json(cfg);
  std::string pairs;
  for (const std::string& key : config_keys()) {
    std::string pointer = "/" + key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    const nlohmann::json& v = j.at(nlohmann::json::json_pointer(pointer));
    std::string text = v.dump();
    if (v.is_array()) text = text.substr(1, text.size() - 2);
    if (v.is_string()) text = v.get<std::string>();
    pairs += key + " = " + text + "\n";
  }
  CHECK(config_from_pairs(pairs) == cfg);
}

TEST_CASE("key = value files and overrides") {
  RunConfig cfg = config_from_pairs(
      "# comment\n"
      "seed = 9\n"
      "via.rho = 0.05\n"
      "fit.method = isa\n"
      "sweep.grid = 100, 200\n"
      "sweep.methods = spa,via\n"
      "fit.sigma = null\n"
      "via.warm_start = false\n");
  CHECK(cfg.seed == 9);
  CHECK(cfg.via.rho == 0.05);
  CHECK(cfg.fit.method == "isa");
  CHECK(cfg.sweep.grid == std::vector<double>{100, 200});
  CHECK(cfg.sweep.methods == std::vector<std::string>{"spa", "via"});
  CHECK_FALSE(cfg.fit.sigma.has_value());
  CHECK_FALSE(cfg.via.warm_start);

  apply_assignment(cfg, "sweep.grid=5");
  CHECK(cfg.sweep.grid == std::vector<double>{5});
  apply_assignment(cfg, "fit.sigma=0.5");
  CHECK(cfg.fit.sigma == 0.5);
}

TEST_CASE("config errors") {
  RunConfig cfg;
  CHECK_THROWS_WITH_AS(apply_assignment(cfg, "via.rhoo=1"), doctest::Contains("via.rhoo"), ConfigError);
  CHECK_THROWS_AS(apply_assignment(cfg, "via.rho"), ConfigError);
  CHECK_THROWS_AS(apply_assignment(cfg, "synth.N=2.5"), ConfigError);
  CHECK_THROWS_AS(set_config_value(cfg, "fit.dimred", 1), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"via", {{"bogus", 1}}}}), ConfigError);

  const fs::path dir = scratch("errors");
  write_text(dir / "neg.txt", "via.rho = -1\n");
  CHECK_THROWS_AS(load_config(dir / "neg.txt"), ConfigError);
  write_text(dir / "zero.json", "{\"via\": {\"rho\": 0}}");
  CHECK_THROWS_AS(load_config(dir / "zero.json"), ConfigError);
  write_text(dir / "broken.json", "{\"via\": ");
  CHECK_THROWS(load_config(dir / "broken.json"));
}
