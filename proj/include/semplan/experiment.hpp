#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semplan/lbc.hpp"
#include "semplan/planner.hpp"
#include "semplan/robustness.hpp"
#include "semplan/scenario.hpp"

namespace semplan {

/// Outcome of one transmit-and-replan trial, scored against the true map.
struct TrialRecord {
  Method method = Method::kLbc;
  double snr_db = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;            // no path on the received map
  double weight_error = 0.0;      // W_true(planned) - W_true(p*)
  int nontraversable_count = 0;   // planned cells inside the true obstacle mask
  bool exact_match = false;
  double mean_delta = 0.0;
};

inline constexpr int kFailedCount = -1;

struct AggregateRow {
  Method method = Method::kLbc;
  double snr_db = 0.0;
  std::size_t n = 0;  // successful trials
  std::size_t failures = 0;
  double weight_error_mean = 0.0;
  double weight_error_stderr = 0.0;
  double nontraversable_mean = 0.0;
  double nontraversable_stderr = 0.0;
  double exact_match_rate = 0.0;
  double mean_delta = 0.0;
};

struct SweepResult {
  std::vector<TrialRecord> records;
  std::vector<AggregateRow> aggregates;
};

/// Seed of trial `index`; shared by every method and SNR so comparisons are paired.
std::uint64_t trial_seed(std::uint64_t master, std::size_t index);

/// A scenario with its true map, true plan and cached per-SNR allocations.
class Experiment {
 public:
  explicit Experiment(ScenarioConfig config);

  const ScenarioConfig& config() const noexcept { return config_; }
  const GridMap& true_map() const noexcept { return map_; }
  const TravGraph& true_graph() const noexcept { return graph_; }
  const Path& true_best() const noexcept { return best_; }
  Cell source() const noexcept { return source_; }
  Cell target() const noexcept { return target_; }
  VertexId source_vertex() const;
  VertexId target_vertex() const;

  /// True-map cost of a cell; obstacle cells cost max((kappa / tau_min)^2, W(p*)).
  double true_cell_cost(std::size_t cell) const;

  /// LBC allocation at an SNR (computed once, then cached).
  std::shared_ptr<const AllocationResult> lbc_allocation(double snr_db) const;

  /// Per-region delta a method transmits with.
  std::vector<double> deltas(Method method, double snr_db) const;

  TrialRecord run_trial(Method method, double snr_db, std::uint64_t seed, std::size_t trial_index = 0) const;

  SweepResult sweep() const;

 private:
  ScenarioConfig config_;
  GridMap map_;
  TravGraph graph_;
  Cell source_;
  Cell target_;
  Path best_;
  double obstacle_cost_ = 0.0;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const AllocationResult>> cache_;
};

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records, const ScenarioConfig& config);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Manifest: config hash, seed, code version, output files.
nlohmann::json run_manifest(const ScenarioConfig& config, const std::vector<std::string>& outputs);

inline constexpr const char* kCodeVersion = "0.1.0";

struct OptVarVerifyParams {
  std::size_t pairs = 100;
  std::size_t infeasible_pairs = 5;
  double delta_w_min = 0.5;
  double delta_w_max = 4.0;
  double var_star_max_ratio = 0.9;  // var_star <= ratio * delta_w^2 for feasible pairs
  std::uint64_t seed = 1;
  OptVarScanParams scan;
  double tolerance = 0.02;
};

struct OptVarReport {
  std::vector<OptVarScan> scans;   // feasible pairs
  std::size_t infeasible = 0;     // pairs excluded because delta_w^2 <= var_star
  double max_rel_dev_raw = 0.0;
  double max_rel_dev_elasticity = 0.0;
  double xi_max_analytic = 0.0;
  double xi_max_scan = 0.0;
  double xi_argmax_scan = 0.0;
  double tolerance = 0.02;
};

OptVarReport verify_optvar(const OptVarVerifyParams& params = {});
void write_optvar_csv(std::ostream& out, const OptVarReport& report);
nlohmann::json to_json(const OptVarReport& report);

}  // namespace semplan
