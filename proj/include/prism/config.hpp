#pragma once

// Run configuration shared by every CLI subcommand. Files are nested JSON or
// plain "dotted.key = value" lines; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prism/isa.hpp"
#include "prism/via.hpp"

namespace prism {

struct SynthConfig {
  int N = 5;
  int M = 50;
  int T = 1000;
  double snr_db = 20.0;

  bool operator==(const SynthConfig&) const = default;
};

struct FitConfig {
  std::string method = "via";  // spa | isa | via
  bool dimred = true;
  // Model order; 0 takes it from the dataset's ground truth.
  int N = 0;
  // Noise level; unset takes it from the dataset's ground truth.
  std::optional<double> sigma;

  bool operator==(const FitConfig&) const = default;
};

struct SweepConfig {
  std::string variable = "T";  // T | snr_db
  std::vector<double> grid{250, 500, 1000, 2000, 4000};
  int trials = 10;
  std::vector<std::string> methods{"spa", "via"};

  bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  SynthConfig synth;
  FitConfig fit;
  SweepConfig sweep;
  IsaConfig isa;
  ViaConfig via;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

// Sets one dotted key from a JSON value; ConfigError on unknown keys or
// mistyped values.
void set_config_value(RunConfig& cfg, const std::string& key, const nlohmann::json& value);
// "key=value" with the value parsed as JSON when possible, a comma list as an
// array, and a bare string otherwise.
void apply_assignment(RunConfig& cfg, const std::string& assignment);
std::vector<std::string> config_keys();

RunConfig config_from_json(const nlohmann::json& j);
RunConfig config_from_pairs(const std::string& text);
nlohmann::json config_to_json(const RunConfig& cfg);

// Format chosen by content: a leading '{' means JSON. The result is validated.
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& cfg);

}  // namespace prism
