#include "semplan/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "semplan/error.hpp"

namespace semplan {

using nlohmann::json;

const char* to_string(Method m) {
  switch (m) {
    case Method::kLbc: return "lbc";
    case Method::kUniform: return "uniform";
    case Method::kLowFidelity: return "low";
    case Method::kHighFidelity: return "high";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "lbc") return Method::kLbc;
  if (s == "uniform") return Method::kUniform;
  if (s == "low") return Method::kLowFidelity;
  if (s == "high") return Method::kHighFidelity;
  throw ConfigError("unknown method '" + s + "'");
}

void ScenarioConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (snr_db.empty()) throw ConfigError("snr_db list must not be empty");
  if (methods.empty()) throw ConfigError("methods list must not be empty");
  if (region_rows < 1 || region_cols < 1) throw ConfigError("region grid must be at least 1x1");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(delta_init > 0.0 && delta_init <= 1.0)) throw ConfigError("delta_init must be in (0, 1]");
  if (!(low_fidelity_delta > 0.0 && low_fidelity_delta <= 1.0) ||
      !(high_fidelity_delta > 0.0 && high_fidelity_delta <= 1.0)) {
    throw ConfigError("fixed-profile deltas must be in (0, 1]");
  }
  if (map.kind == MapSpec::Kind::kFile && map.path.empty()) throw ConfigError("map.path required for file maps");
  try {
    channel.validate();
    allocation.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

double snr_from_json(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError("snr values must be numbers or \"inf\"");
}

json snr_to_json(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Cell cell_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("cells are [x, y] arrays");
  return Cell{j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("schema_version")) throw ConfigError("missing schema_version");
    c.schema_version = j.at("schema_version").get<int>();

    if (j.contains("map")) {
      const auto& m = j.at("map");
      const auto kind = m.value("kind", std::string("gap_corridor"));
      if (kind == "generated") c.map.kind = MapSpec::Kind::kGenerated;
      else if (kind == "gap_corridor") c.map.kind = MapSpec::Kind::kGapCorridor;
      else if (kind == "file") c.map.kind = MapSpec::Kind::kFile;
      else throw ConfigError("unknown map kind '" + kind + "'");
      read_opt(m, "seed", c.map.seed);
      read_opt(m, "width", c.map.width);
      read_opt(m, "height", c.map.height);
      read_opt(m, "obstacle_density", c.map.obstacle_density);
      read_opt(m, "smoothing_passes", c.map.smoothing_passes);
      read_opt(m, "path", c.map.path);
      c.map.gap.width = c.map.width;
      c.map.gap.height = c.map.height;
      read_opt(m, "wall_thickness", c.map.gap.wall_thickness);
      read_opt(m, "gap_width", c.map.gap.gap_width);
      read_opt(m, "tau_low", c.map.gap.tau_low);
      read_opt(m, "tau_high", c.map.gap.tau_high);
      if (m.contains("smoothing_passes")) c.map.gap.smoothing_passes = c.map.smoothing_passes;
      read_opt(m, "endpoint_margin", c.map.gap.endpoint_margin);
    }
    if (j.contains("source")) c.source = cell_from_json(j.at("source"));
    if (j.contains("target")) c.target = cell_from_json(j.at("target"));
    if (j.contains("regions")) {
      c.region_rows = j.at("regions").at("rows").get<int>();
      c.region_cols = j.at("regions").at("cols").get<int>();
    }
    read_opt(j, "kappa", c.kappa);

    if (j.contains("channel")) {
      const auto& ch = j.at("channel");
      if (ch.contains("kind")) c.channel.kind = channel_kind_from_string(ch.at("kind").get<std::string>());
      read_opt(ch, "sigma0_sq", c.channel.sigma0_sq);
      read_opt(ch, "beta", c.channel.beta);
      read_opt(ch, "gamma_floor", c.channel.gamma_floor);
      read_opt(ch, "calibration_table", c.calibration_table);
    }
    if (j.contains("allocation")) {
      const auto& a = j.at("allocation");
      read_opt(a, "n_samples", c.allocation.n_samples);
      read_opt(a, "h", c.allocation.h);
      read_opt(a, "iota", c.allocation.iota);
      read_opt(a, "varrho", c.allocation.varrho);
      read_opt(a, "r_c", c.allocation.corridor_radius);
      read_opt(a, "r", c.allocation.window_radius);
      if (a.contains("psi_h_scale") && !a.at("psi_h_scale").is_null()) {
        c.allocation.psi_h_scale = a.at("psi_h_scale").get<double>();
      }
      read_opt(a, "delta_min", c.allocation.delta_min);
      read_opt(a, "delta_max", c.allocation.delta_max);
      read_opt(a, "include_best_path", c.allocation.include_best_path);
      read_opt(a, "batch_size", c.allocation.batch_size);
      read_opt(a, "max_attempts_factor", c.allocation.max_attempts_factor);
      read_opt(a, "max_steps", c.allocation.max_steps);
      read_opt(a, "delta_init", c.delta_init);
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
    }
    read_opt(j, "low_fidelity_delta", c.low_fidelity_delta);
    read_opt(j, "high_fidelity_delta", c.high_fidelity_delta);
    if (j.contains("snr_db")) {
      c.snr_db.clear();
      for (const auto& v : j.at("snr_db")) c.snr_db.push_back(snr_from_json(v));
    }
    read_opt(j, "trials", c.trials);
    read_opt(j, "seed", c.seed);
    read_opt(j, "workers", c.workers);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  json m;
  switch (c.map.kind) {
    case MapSpec::Kind::kGenerated: m["kind"] = "generated"; break;
    case MapSpec::Kind::kGapCorridor: m["kind"] = "gap_corridor"; break;
    case MapSpec::Kind::kFile: m["kind"] = "file"; break;
  }
  m["seed"] = c.map.seed;
  m["width"] = c.map.width;
  m["height"] = c.map.height;
  m["obstacle_density"] = c.map.obstacle_density;
  m["smoothing_passes"] = c.map.kind == MapSpec::Kind::kGapCorridor ? c.map.gap.smoothing_passes
                                                                    : c.map.smoothing_passes;
  m["path"] = c.map.path;
  m["wall_thickness"] = c.map.gap.wall_thickness;
  m["gap_width"] = c.map.gap.gap_width;
  m["tau_low"] = c.map.gap.tau_low;
  m["tau_high"] = c.map.gap.tau_high;
  m["endpoint_margin"] = c.map.gap.endpoint_margin;
  j["map"] = m;
  if (c.source) j["source"] = {c.source->x, c.source->y};
  if (c.target) j["target"] = {c.target->x, c.target->y};
  j["regions"] = {{"rows", c.region_rows}, {"cols", c.region_cols}};
  j["kappa"] = c.kappa;
  j["channel"] = {{"kind", to_string(c.channel.kind)},
                  {"sigma0_sq", c.channel.sigma0_sq},
                  {"beta", c.channel.beta},
                  {"gamma_floor", c.channel.gamma_floor},
                  {"calibration_table", c.calibration_table}};
  const auto& a = c.allocation;
  j["allocation"] = {{"n_samples", a.n_samples},
                     {"h", a.h},
                     {"iota", a.iota},
                     {"varrho", a.varrho},
                     {"r_c", a.corridor_radius},
                     {"r", a.window_radius},
                     {"psi_h_scale", a.psi_h_scale ? json(*a.psi_h_scale) : json(nullptr)},
                     {"delta_min", a.delta_min},
                     {"delta_max", a.delta_max},
                     {"include_best_path", a.include_best_path},
                     {"batch_size", a.batch_size},
                     {"max_attempts_factor", a.max_attempts_factor},
                     {"max_steps", a.max_steps},
                     {"delta_init", c.delta_init}};
  json methods = json::array();
  for (auto mm : c.methods) methods.push_back(to_string(mm));
  j["methods"] = methods;
  j["low_fidelity_delta"] = c.low_fidelity_delta;
  j["high_fidelity_delta"] = c.high_fidelity_delta;
  json snrs = json::array();
  for (double s : c.snr_db) snrs.push_back(snr_to_json(s));
  j["snr_db"] = snrs;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ScenarioConfig& c) {
  auto canonical = to_json(c);
  canonical.erase("workers");  // does not affect results
  const std::string text = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace semplan
