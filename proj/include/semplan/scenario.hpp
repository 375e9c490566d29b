#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semplan/channel.hpp"
#include "semplan/grid_map.hpp"
#include "semplan/lbc.hpp"

namespace semplan {

inline constexpr int kSchemaVersion = 1;

enum class Method {
  kLbc,           // LBC allocation
  kUniform,       // every region at the mean of the LBC allocation
  kLowFidelity,   // every region at low_fidelity_delta
  kHighFidelity,  // every region at high_fidelity_delta
};

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct MapSpec {
  enum class Kind { kGenerated, kGapCorridor, kFile };
  Kind kind = Kind::kGapCorridor;
  std::uint64_t seed = 1;
  int width = 64;
  int height = 64;
  double obstacle_density = 0.2;
  int smoothing_passes = 2;
  GapCorridorSpec gap;
  std::string path;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  MapSpec map;
  std::optional<Cell> source;  // defaults come from the map generator
  std::optional<Cell> target;
  int region_rows = 4;
  int region_cols = 4;
  double kappa = 1.0;
  ChannelProfile channel;
  std::string calibration_table;  // optional CSV path
  LbcParams allocation;
  double delta_init = 0.5;        // uniform delta assumed while computing the allocation
  std::vector<Method> methods{Method::kLbc, Method::kUniform, Method::kLowFidelity, Method::kHighFidelity};
  double low_fidelity_delta = 0.2;
  double high_fidelity_delta = 1.0;
  std::vector<double> snr_db{0.0, 4.0, 8.0, 12.0, 16.0, 20.0};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::size_t workers = 0;  // 0: SEMPLAN_WORKERS or hardware concurrency

  void validate() const;
};

/// Throws ConfigError on missing/invalid fields and ParseError on JSON syntax.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);
ScenarioConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ScenarioConfig& c);

}  // namespace semplan
