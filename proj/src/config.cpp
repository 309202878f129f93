#include "prism/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "prism/errors.hpp"
#include "prism/io.hpp"

namespace prism {

using nlohmann::json;

namespace {

[[noreturn]] void type_error(const std::string& key, const char* expected, const json& v) {
  throw ConfigError("config key '" + key + "' expects " + expected + ", got " + v.dump());
}

void assign(double& dst, const json& v, const std::string& key) {
  if (!v.is_number()) type_error(key, "a number", v);
  dst = v.get<double>();
}

void assign(int& dst, const json& v, const std::string& key) {
  if (!v.is_number_integer()) type_error(key, "an integer", v);
  dst = v.get<int>();
}

void assign(std::uint64_t& dst, const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) type_error(key, "a non-negative integer", v);
  dst = v.get<std::uint64_t>();
}

void assign(bool& dst, const json& v, const std::string& key) {
  if (!v.is_boolean()) type_error(key, "true or false", v);
  dst = v.get<bool>();
}

void assign(std::string& dst, const json& v, const std::string& key) {
  if (!v.is_string()) type_error(key, "a string", v);
  dst = v.get<std::string>();
}

void assign(std::optional<double>& dst, const json& v, const std::string& key) {
  if (v.is_null()) {
    dst.reset();
    return;
  }
  double x = 0.0;
  assign(x, v, key);
  dst = x;
}

template <typename T>
void assign(std::vector<T>& dst, const json& v, const std::string& key) {
  const json arr = v.is_array() ? v : json::array({v});
  std::vector<T> out;
  for (const json& item : arr) {
    T x{};
    assign(x, item, key);
    out.push_back(std::move(x));
  }
  dst = std::move(out);
}

template <typename T>
json to_value(const T& v) {
  return json(v);
}

json to_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Field {
  std::string key;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename Access>
Field make_field(std::string key, Access access) {
  Field f;
  f.key = key;
  f.get = [access](const RunConfig& c) { return to_value(access(const_cast<RunConfig&>(c))); };
  f.set = [access, key](RunConfig& c, const json& v) { assign(access(c), v, key); };
  return f;
}

#define PRISM_FIELD(path) make_field(#path, [](RunConfig& c) -> auto& { return c.path; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      PRISM_FIELD(seed),
      PRISM_FIELD(output_dir),
      PRISM_FIELD(synth.N),
      PRISM_FIELD(synth.M),
      PRISM_FIELD(synth.T),
      PRISM_FIELD(synth.snr_db),
      PRISM_FIELD(fit.method),
      PRISM_FIELD(fit.dimred),
      PRISM_FIELD(fit.N),
      PRISM_FIELD(fit.sigma),
      PRISM_FIELD(sweep.variable),
      PRISM_FIELD(sweep.grid),
      PRISM_FIELD(sweep.trials),
      PRISM_FIELD(sweep.methods),
      PRISM_FIELD(isa.proposals_per_point),
      PRISM_FIELD(isa.max_iters),
      PRISM_FIELD(isa.min_accepted),
      PRISM_FIELD(isa.max_extra_rounds),
      PRISM_FIELD(isa.rel_tol),
      PRISM_FIELD(isa.collapse_rate),
      PRISM_FIELD(isa.abort_patience),
      PRISM_FIELD(via.rho),
      PRISM_FIELD(via.admm_dual_tol),
      PRISM_FIELD(via.admm_max_iters),
      PRISM_FIELD(via.max_outer_iters),
      PRISM_FIELD(via.golden_a),
      PRISM_FIELD(via.golden_b),
      PRISM_FIELD(via.golden_tol),
      PRISM_FIELD(via.bisect_tol),
      PRISM_FIELD(via.max_widenings),
      PRISM_FIELD(via.rel_tol),
      PRISM_FIELD(via.warm_start),
      PRISM_FIELD(via.warm_halfwidth),
  };
  return table;
}

#undef PRISM_FIELD

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (const auto& [name, value] : j.items()) {
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    if (value.is_object()) {
      flatten(value, key, out);
    } else {
      out.emplace_back(key, value);
    }
  }
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

json parse_scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

json parse_value(const std::string& text) {
  if (text.empty()) return json("");
  if (text.front() != '[' && text.front() != '"' && text.find(',') != std::string::npos) {
    json arr = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) arr.push_back(parse_scalar(trim(item)));
    return arr;
  }
  return parse_scalar(text);
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

}  // namespace

void RunConfig::validate() const {
  isa.validate();
  via.validate();
  if (synth.N < 2) throw ConfigError("synth.N must be >= 2");
  if (synth.M < synth.N - 1) throw ConfigError("synth.M must be >= synth.N - 1");
  if (synth.T < 1) throw ConfigError("synth.T must be >= 1");
  if (!one_of(fit.method, {"spa", "isa", "via"})) {
    throw ConfigError("fit.method must be one of spa, isa, via");
  }
  if (fit.N != 0 && fit.N < 2) throw ConfigError("fit.N must be 0 or >= 2");
  if (fit.sigma && !(*fit.sigma > 0.0)) throw ConfigError("fit.sigma must be positive");
  if (!one_of(sweep.variable, {"T", "snr_db"})) {
    throw ConfigError("sweep.variable must be T or snr_db");
  }
  if (sweep.grid.empty()) throw ConfigError("sweep.grid must not be empty");
  if (sweep.variable == "T") {
    for (double v : sweep.grid) {
      if (!(v >= 1.0) || v != static_cast<double>(static_cast<long>(v))) {
        throw ConfigError("sweep.grid values for T must be positive integers");
      }
    }
  }
  if (sweep.trials < 1) throw ConfigError("sweep.trials must be >= 1");
  if (sweep.methods.empty()) throw ConfigError("sweep.methods must not be empty");
  for (const std::string& m : sweep.methods) {
    if (!one_of(m, {"spa", "isa", "via"})) {
      throw ConfigError("sweep.methods entries must be spa, isa or via");
    }
  }
}

void set_config_value(RunConfig& cfg, const std::string& key, const json& value) {
  for (const Field& f : fields()) {
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_assignment(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set_config_value(cfg, trim(assignment.substr(0, eq)), parse_value(trim(assignment.substr(eq + 1))));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::vector<std::pair<std::string, json>> flat;
  flatten(j, "", flat);
  RunConfig cfg;
  for (const auto& [key, value] : flat) set_config_value(cfg, key, value);
  return cfg;
}

RunConfig config_from_pairs(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    apply_assignment(cfg, line);
  }
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json out = json::object();
  for (const Field& f : fields()) {
    std::string pointer = "/" + f.key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    out[json::json_pointer(pointer)] = f.get(cfg);
  }
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  RunConfig cfg;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    cfg = config_from_json(j);
  } else {
    cfg = config_from_pairs(text);
  }
  cfg.validate();
  return cfg;
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg) {
  write_json(path, config_to_json(cfg));
}

}  // namespace prism
