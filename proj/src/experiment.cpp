#include "semplan/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "semplan/error.hpp"
#include "semplan/format.hpp"
#include "semplan/parallel.hpp"
#include "semplan/rng.hpp"
#include "semplan/stats.hpp"

namespace semplan {

std::uint64_t trial_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(derive_seed(master, Stream::kTrial), index);
}

namespace {

struct BuiltMap {
  GridMap map;
  std::optional<Cell> source;
  std::optional<Cell> target;
};

BuiltMap build_map(const ScenarioConfig& c) {
  switch (c.map.kind) {
    case MapSpec::Kind::kGenerated:
      return {generate_map(c.map.seed, c.map.width, c.map.height, c.map.obstacle_density, c.map.smoothing_passes),
              std::nullopt, std::nullopt};
    case MapSpec::Kind::kGapCorridor: {
      auto g = generate_gap_corridor(c.map.seed, c.map.gap);
      return {std::move(g.map), g.source, g.target};
    }
    case MapSpec::Kind::kFile:
      return {load_map(c.map.path), std::nullopt, std::nullopt};
  }
  throw ConfigError("unknown map kind");
}

Cell require_cell(const std::optional<Cell>& configured, const std::optional<Cell>& fallback, const char* what) {
  if (configured) return *configured;
  if (fallback) return *fallback;
  throw ConfigError(std::string(what) + " cell must be given for this map kind");
}

}  // namespace

Experiment::Experiment(ScenarioConfig config)
    : config_(std::move(config)),
      map_(GridMap(1, 1, {1.0})),
      graph_(TravGraph::build(GridMap(1, 1, {1.0}))) {
  config_.validate();
  if (!config_.calibration_table.empty()) {
    config_.channel.calibration = CalibrationTable::load(config_.calibration_table);
  }
  auto built = build_map(config_);
  try {
    map_ = partition_regions(built.map, config_.region_rows, config_.region_cols);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  graph_ = TravGraph::build(map_, config_.kappa);
  source_ = require_cell(config_.source, built.source, "source");
  target_ = require_cell(config_.target, built.target, "target");
  for (const Cell c : {source_, target_}) {
    if (!map_.contains(c) || map_.nontraversable(c)) {
      throw ConfigError("endpoint (" + std::to_string(c.x) + ", " + std::to_string(c.y) + ") is not traversable");
    }
  }
  best_ = dijkstra(graph_, source_vertex(), target_vertex());
  const double tau_cost = vertex_cost(map_.tau_min(), config_.kappa);
  obstacle_cost_ = std::max(tau_cost, best_.total_weight);
}

VertexId Experiment::source_vertex() const { return *graph_.vertex_at(source_); }
VertexId Experiment::target_vertex() const { return *graph_.vertex_at(target_); }

double Experiment::true_cell_cost(std::size_t cell) const {
  if (map_.nontraversable(cell)) return obstacle_cost_;
  return vertex_cost(map_.tau(cell), config_.kappa);
}

std::shared_ptr<const AllocationResult> Experiment::lbc_allocation(double snr_db) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(snr_db); it != cache_.end()) return it->second;
  }
  // The allocator sees only the nominal channel: fading realisations are unknown in advance.
  ChannelProfile nominal = config_.channel;
  nominal.kind = ChannelKind::kAwgn;
  const std::vector<double> initial(map_.region_count(), config_.delta_init);
  const VarianceField field = variance_field(map_, graph_, initial, snr_db, nominal, 0);

  LbcParams offline_params = config_.allocation;
  offline_params.seed = derive_seed(config_.seed, Stream::kOffline);
  const LbcCounts offline =
      lbc_offline(graph_, source_vertex(), target_vertex(), field, offline_params, config_.workers);

  LbcParams online_params = config_.allocation;
  online_params.seed = derive_seed(config_.seed, Stream::kOnline);
  auto result = std::make_shared<const AllocationResult>(allocate(graph_, graph_, map_, source_vertex(),
                                                                  target_vertex(), field, online_params,
                                                                  offline.counts, config_.workers));
  std::lock_guard lock(cache_mutex_);
  return cache_.emplace(snr_db, std::move(result)).first->second;
}

std::vector<double> Experiment::deltas(Method method, double snr_db) const {
  const std::size_t n = map_.region_count();
  switch (method) {
    case Method::kLbc:
      return lbc_allocation(snr_db)->state.delta;
    case Method::kUniform: {
      const auto& d = lbc_allocation(snr_db)->state.delta;
      const double m = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
      return std::vector<double>(n, m);
    }
    case Method::kLowFidelity:
      return std::vector<double>(n, config_.low_fidelity_delta);
    case Method::kHighFidelity:
      return std::vector<double>(n, config_.high_fidelity_delta);
  }
  throw std::invalid_argument("unknown method");
}

TrialRecord Experiment::run_trial(Method method, double snr_db, std::uint64_t seed, std::size_t trial_index) const {
  TrialRecord rec;
  rec.method = method;
  rec.snr_db = snr_db;
  rec.trial = trial_index;
  rec.seed = seed;
  const auto delta = deltas(method, snr_db);
  rec.mean_delta = std::accumulate(delta.begin(), delta.end(), 0.0) / static_cast<double>(delta.size());

  const GridMap received = transmit_map(map_, delta, snr_db, config_.channel, seed);
  auto fail = [&] {
    rec.failed = true;
    rec.weight_error = std::numeric_limits<double>::infinity();
    rec.nontraversable_count = kFailedCount;
    return rec;
  };
  if (received.nontraversable(source_) || received.nontraversable(target_)) return fail();
  const TravGraph graph = TravGraph::build(received, config_.kappa);
  Path planned;
  try {
    planned = dijkstra(graph, *graph.vertex_at(source_), *graph.vertex_at(target_));
  } catch (const UnreachableError&) {
    return fail();
  }

  double w_true = 0.0;
  int blocked = 0;
  bool same = planned.size() == best_.size();
  for (std::size_t i = 0; i < planned.size(); ++i) {
    const std::size_t cell = graph.cell_index(planned.vertices[i]);
    w_true += true_cell_cost(cell);
    if (map_.nontraversable(cell)) ++blocked;
    if (same && cell != graph_.cell_index(best_.vertices[i])) same = false;
  }
  rec.weight_error = w_true - best_.total_weight;
  rec.nontraversable_count = blocked;
  rec.exact_match = same;
  return rec;
}

SweepResult Experiment::sweep() const {
  const auto& c = config_;
  const bool needs_lbc = std::any_of(c.methods.begin(), c.methods.end(),
                                     [](Method m) { return m == Method::kLbc || m == Method::kUniform; });
  if (needs_lbc) {
    for (double snr : c.snr_db) lbc_allocation(snr);
  }
  const std::size_t per_method = c.snr_db.size() * c.trials;
  SweepResult out;
  out.records.resize(c.methods.size() * per_method);
  parallel_for(out.records.size(), c.workers, [&](std::size_t job) {
    const Method m = c.methods[job / per_method];
    const std::size_t rest = job % per_method;
    const double snr = c.snr_db[rest / c.trials];
    const std::size_t t = rest % c.trials;
    out.records[job] = run_trial(m, snr, trial_seed(c.seed, t), t);
  });
  out.aggregates = aggregate(out.records, c);
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records, const ScenarioConfig& config) {
  std::vector<AggregateRow> rows;
  for (Method m : config.methods) {
    for (double snr : config.snr_db) {
      AggregateRow row;
      row.method = m;
      row.snr_db = snr;
      std::vector<double> we, nt, delta;
      std::size_t exact = 0;
      for (const auto& r : records) {
        if (r.method != m || r.snr_db != snr) continue;
        delta.push_back(r.mean_delta);
        if (r.failed) {
          ++row.failures;
          continue;
        }
        we.push_back(r.weight_error);
        nt.push_back(static_cast<double>(r.nontraversable_count));
        if (r.exact_match) ++exact;
      }
      row.n = we.size();
      if (!we.empty()) {
        row.weight_error_mean = stats::mean(we);
        row.weight_error_stderr = stats::standard_error(we);
        row.nontraversable_mean = stats::mean(nt);
        row.nontraversable_stderr = stats::standard_error(nt);
        row.exact_match_rate = static_cast<double>(exact) / static_cast<double>(we.size());
      }
      if (!delta.empty()) row.mean_delta = stats::mean(delta);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "method,snr_db,trial,seed,failed,weight_error,nontraversable_count,exact_match,mean_delta\n";
  for (const auto& r : records) {
    out << to_string(r.method) << ',' << format_double(r.snr_db) << ',' << r.trial << ',' << r.seed << ','
        << (r.failed ? 1 : 0) << ',' << format_double(r.weight_error) << ',' << r.nontraversable_count << ','
        << (r.exact_match ? 1 : 0) << ',' << format_double(r.mean_delta) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "method,snr_db,n,failures,weight_error_mean,weight_error_stderr,nontraversable_mean,"
         "nontraversable_stderr,exact_match_rate,mean_delta\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << format_double(r.snr_db) << ',' << r.n << ',' << r.failures << ','
        << format_double(r.weight_error_mean) << ',' << format_double(r.weight_error_stderr) << ','
        << format_double(r.nontraversable_mean) << ',' << format_double(r.nontraversable_stderr) << ','
        << format_double(r.exact_match_rate) << ',' << format_double(r.mean_delta) << '\n';
  }
}

nlohmann::json run_manifest(const ScenarioConfig& config, const std::vector<std::string>& outputs) {
  return {{"schema_version", kSchemaVersion},
          {"config_hash", config_hash(config)},
          {"seed", config.seed},
          {"code_version", kCodeVersion},
          {"outputs", outputs},
          {"config", to_json(config)}};
}

OptVarReport verify_optvar(const OptVarVerifyParams& params) {
  OptVarReport report;
  report.tolerance = params.tolerance;
  Rng rng(params.seed, Stream::kScan);
  const double span = params.delta_w_max - params.delta_w_min;
  for (std::size_t i = 0; i < params.pairs; ++i) {
    const double dw = params.delta_w_min + span * rng.uniform();
    const double var_star = params.var_star_max_ratio * rng.uniform() * dw * dw;
    auto scan = scan_optvar(dw, var_star, params.scan);
    if (!scan.predicted) {
      ++report.infeasible;
      continue;
    }
    report.max_rel_dev_raw = std::max(report.max_rel_dev_raw, scan.rel_dev_raw);
    report.max_rel_dev_elasticity = std::max(report.max_rel_dev_elasticity, scan.rel_dev_elasticity);
    report.scans.push_back(scan);
  }
  for (std::size_t i = 0; i < params.infeasible_pairs; ++i) {
    const double dw = params.delta_w_min + span * rng.uniform();
    const double var_star = dw * dw * (1.0 + rng.uniform());
    if (!scan_optvar(dw, var_star, params.scan).predicted) ++report.infeasible;
  }

  report.xi_max_analytic = xi_max();
  // Fine scan of |z| phi(z); step 1e-6 puts the grid maximum within ~1e-13 of the true one.
  for (std::size_t k = 0; k <= 5'000'000; ++k) {
    const double z = static_cast<double>(k) * 1e-6;
    const double xi = z * stats::normal_pdf(z);
    if (xi > report.xi_max_scan) {
      report.xi_max_scan = xi;
      report.xi_argmax_scan = z;
    }
  }
  return report;
}

void write_optvar_csv(std::ostream& out, const OptVarReport& report) {
  out << "delta_w,var_star,predicted,argmax_raw,rel_dev_raw,argmax_elasticity,rel_dev_elasticity\n";
  for (const auto& s : report.scans) {
    out << format_double(s.delta_w) << ',' << format_double(s.var_star) << ',' << format_double(*s.predicted)
        << ',' << format_double(s.argmax_raw) << ',' << format_double(s.rel_dev_raw) << ','
        << format_double(s.argmax_elasticity) << ',' << format_double(s.rel_dev_elasticity) << '\n';
  }
}

nlohmann::json to_json(const OptVarReport& r) {
  return {{"feasible_pairs", r.scans.size()},
          {"infeasible_pairs", r.infeasible},
          {"max_rel_dev_raw_derivative", r.max_rel_dev_raw},
          {"max_rel_dev_log_variance_elasticity", r.max_rel_dev_elasticity},
          {"tolerance", r.tolerance},
          {"xi_max_analytic", r.xi_max_analytic},
          {"xi_max_scan", r.xi_max_scan},
          {"xi_argmax_scan", r.xi_argmax_scan}};
}

}  // namespace semplan
