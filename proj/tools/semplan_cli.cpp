// semplan command-line front end. Every subcommand reads a scenario config
// (JSON) and writes plain-text or CSV outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "semplan/channel.hpp"
#include "semplan/error.hpp"
#include "semplan/experiment.hpp"
#include "semplan/format.hpp"
#include "semplan/grid_map.hpp"
#include "semplan/lbc.hpp"
#include "semplan/parallel.hpp"
#include "semplan/planner.hpp"
#include "semplan/rng.hpp"
#include "semplan/scenario.hpp"

namespace fs = std::filesystem;
using namespace semplan;

namespace {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kParseError = 3,
  kRuntimeError = 4,
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

ScenarioConfig load(const std::string& path, std::optional<std::size_t> workers) {
  ScenarioConfig c = load_config(path);
  if (std::getenv("SEMPLAN_WORKERS")) c.workers = default_workers();
  if (workers) c.workers = *workers;
  return c;
}

std::vector<double> parse_deltas(const Experiment& ex, const std::string& method, double snr) {
  return ex.deltas(method_from_string(method), snr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-channel path planning experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::size_t> workers;
  app.add_option("-w,--workers", workers, "Worker threads (overrides config and SEMPLAN_WORKERS)");

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  };

  // gen-map
  auto* gen = app.add_subcommand("gen-map", "Generate the scenario's true map");
  add_config(gen);
  std::string map_out, mask_out;
  gen->add_option("-o,--out", map_out, "Map file")->required();
  gen->add_option("--mask-csv", mask_out, "Obstacle mask CSV");

  // plan
  auto* plan = app.add_subcommand("plan", "Shortest path on the true map or a given map file");
  add_config(plan);
  std::string plan_map, path_out;
  plan->add_option("--map", plan_map, "Plan on this map instead of the scenario map")->check(CLI::ExistingFile);
  plan->add_option("-o,--out", path_out, "Path CSV");

  // lbc-offline
  auto* offline = app.add_subcommand("lbc-offline", "Full-map LBC counts for the scenario");
  add_config(offline);
  double snr = 10.0;
  std::string state_out;
  offline->add_option("--snr", snr, "SNR (dB) of the variance field used for xi");
  offline->add_option("-o,--out", state_out, "LBC state file")->required();

  // allocate
  auto* alloc = app.add_subcommand("allocate", "LBC-driven sparsification ratios per region");
  add_config(alloc);
  std::string state_in, regions_out;
  alloc->add_option("--snr", snr, "SNR (dB)");
  alloc->add_option("--lbc-state", state_in, "Offline LBC state (computed if omitted)")->check(CLI::ExistingFile);
  alloc->add_option("-o,--out", regions_out, "Region CSV (region,score,delta)");
  alloc->add_option("--state-out", state_out, "Write the resulting LBC state");

  // transmit
  auto* transmit = app.add_subcommand("transmit", "Pass the true map through the channel");
  add_config(transmit);
  std::string method = "lbc";
  std::uint64_t seed = 1;
  std::string received_out;
  transmit->add_option("--method", method, "lbc, uniform, low or high");
  transmit->add_option("--snr", snr, "SNR (dB)");
  transmit->add_option("--seed", seed, "Channel seed");
  transmit->add_option("-o,--out", received_out, "Received map file")->required();

  // trial
  auto* trial = app.add_subcommand("trial", "One trial: allocate, transmit, plan, evaluate");
  add_config(trial);
  std::size_t trial_index = 0;
  trial->add_option("--method", method, "lbc, uniform, low or high");
  trial->add_option("--snr", snr, "SNR (dB)");
  trial->add_option("--trial", trial_index, "Trial index (seed derives from the master seed)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "All methods x SNRs x trials");
  add_config(sweep);
  std::string out_dir = "results";
  sweep->add_option("-o,--out-dir", out_dir, "Output directory");

  // verify-optvar
  auto* optvar = app.add_subcommand("verify-optvar", "Numeric scan of the optimal-variance claim");
  OptVarVerifyParams pp;
  optvar->add_option("--pairs", pp.pairs, "Feasible (gap, variance) pairs");
  optvar->add_option("--seed", pp.seed, "Pair sampling seed");
  optvar->add_option("--tolerance", pp.tolerance, "Relative tolerance");
  std::string optvar_dir;
  optvar->add_option("-o,--out-dir", optvar_dir, "Write optvar.csv and optvar.json here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*optvar) {
      const OptVarReport report = verify_optvar(pp);
      const auto j = to_json(report);
      if (!optvar_dir.empty()) {
        auto csv = open_out(fs::path(optvar_dir) / "optvar.csv");
        write_optvar_csv(csv, report);
        open_out(fs::path(optvar_dir) / "optvar.json") << j.dump(2) << '\n';
      }
      std::cout << j.dump(2) << '\n';
      return kOk;
    }

    const ScenarioConfig config = load(config_path, workers);
    const Experiment ex(config);

    if (*gen) {
      save_map(map_out, ex.true_map());
      if (!mask_out.empty()) {
        auto out = open_out(mask_out);
        write_mask_csv(out, ex.true_map());
      }
      std::cout << "source " << ex.source().x << ' ' << ex.source().y << "\ntarget " << ex.target().x << ' '
                << ex.target().y << '\n';
    } else if (*plan) {
      Path path = ex.true_best();
      std::optional<TravGraph> other;
      if (!plan_map.empty()) {
        GridMap m = load_map(plan_map);
        other = TravGraph::build(m, config.kappa);
        const auto s = other->vertex_at(ex.source());
        const auto t = other->vertex_at(ex.target());
        if (!s || !t) throw UnreachableError("endpoint is not traversable on the given map");
        path = dijkstra(*other, *s, *t);
      }
      const TravGraph& g = other ? *other : ex.true_graph();
      std::cout << "weight " << format_double(path.total_weight) << "\nvertices " << path.size() << '\n';
      if (!path_out.empty()) {
        auto out = open_out(path_out);
        write_path_csv(out, g, path);
      }
    } else if (*offline) {
      ChannelProfile nominal = config.channel;
      nominal.kind = ChannelKind::kAwgn;
      const std::vector<double> initial(ex.true_map().region_count(), config.delta_init);
      const auto field = variance_field(ex.true_map(), ex.true_graph(), initial, snr, nominal, 0);
      LbcParams params = config.allocation;
      params.seed = derive_seed(config.seed, Stream::kOffline);
      const LbcCounts counts =
          lbc_offline(ex.true_graph(), ex.source_vertex(), ex.target_vertex(), field, params, config.workers);
      const LbcState state = finalize_state(counts.counts, {}, ex.true_graph(), ex.true_map(), params);
      save_lbc_state(state_out, state, ex.true_graph());
      std::cout << "psi_h " << state.psi_h << "\nsampled " << counts.stats.successes << "\nqualifying "
                << counts.stats.qualifying << '\n';
    } else if (*alloc) {
      LbcState state;
      SamplingStats sampling;
      std::size_t window_size = 0;
      if (state_in.empty()) {
        const auto result = ex.lbc_allocation(snr);
        state = result->state;
        sampling = result->stats;
        window_size = result->window.size();
      } else {
        const StoredLbc stored = load_lbc_state(state_in, ex.true_graph());
        ChannelProfile nominal = config.channel;
        nominal.kind = ChannelKind::kAwgn;
        const std::vector<double> initial(ex.true_map().region_count(), config.delta_init);
        const auto field = variance_field(ex.true_map(), ex.true_graph(), initial, snr, nominal, 0);
        LbcParams params = config.allocation;
        params.seed = derive_seed(config.seed, Stream::kOnline);
        const AllocationResult result = allocate(ex.true_graph(), ex.true_graph(), ex.true_map(), ex.source_vertex(),
                                                 ex.target_vertex(), field, params, stored.psi_off, config.workers);
        state = result.state;
        sampling = result.stats;
        window_size = result.window.size();
      }
      std::cerr << "window " << window_size << " attempts " << sampling.attempts << " sampled "
                << sampling.successes << " qualifying " << sampling.qualifying << " psi_h " << state.psi_h << '\n';
      if (!regions_out.empty()) {
        auto out = open_out(regions_out);
        write_region_csv(out, state);
      } else {
        write_region_csv(std::cout, state);
      }
      if (!state_out.empty()) save_lbc_state(state_out, state, ex.true_graph());
    } else if (*transmit) {
      const auto delta = parse_deltas(ex, method, snr);
      save_map(received_out, transmit_map(ex.true_map(), delta, snr, config.channel, seed));
    } else if (*trial) {
      const TrialRecord r =
          ex.run_trial(method_from_string(method), snr, trial_seed(config.seed, trial_index), trial_index);
      write_trials_csv(std::cout, {r});
    } else if (*sweep) {
      const SweepResult result = ex.sweep();
      const fs::path dir(out_dir);
      {
        auto out = open_out(dir / "trials.csv");
        write_trials_csv(out, result.records);
      }
      {
        auto out = open_out(dir / "aggregate.csv");
        write_aggregate_csv(out, result.aggregates);
      }
      open_out(dir / "manifest.json") << run_manifest(config, {"trials.csv", "aggregate.csv"}).dump(2) << '\n';
      write_aggregate_csv(std::cout, result.aggregates);
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
