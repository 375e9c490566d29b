#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "semplan/error.hpp"
#include "semplan/experiment.hpp"
#include "semplan/scenario.hpp"

using namespace semplan;
using nlohmann::json;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c;
  c.map.kind = MapSpec::Kind::kGapCorridor;
  c.map.seed = 3;
  c.map.width = c.map.height = 24;
  c.map.gap.width = c.map.gap.height = 24;
  c.map.gap.wall_thickness = 2;
  c.map.gap.gap_width = 3;
  c.region_rows = c.region_cols = 2;
  c.allocation.n_samples = 100;
  c.allocation.batch_size = 50;
  c.allocation.max_attempts_factor = 5;
  c.snr_db = {10.0, std::numeric_limits<double>::infinity()};
  c.trials = 3;
  c.seed = 5;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("config json round trip and hash") {
  const ScenarioConfig c = small_config();
  const ScenarioConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);

  ScenarioConfig more_workers = c;
  more_workers.workers = 8;
  CHECK(config_hash(more_workers) == config_hash(c));
  ScenarioConfig other_seed = c;
  other_seed.seed = 6;
  CHECK(config_hash(other_seed) != config_hash(c));

  CHECK(std::isinf(back.snr_db[1]));
}

TEST_CASE("config validation errors") {
  json j = to_json(small_config());
  j.erase("schema_version");
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  j = to_json(small_config());
  j["schema_version"] = 99;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  j = to_json(small_config());
  j["trials"] = 0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  j = to_json(small_config());
  j["methods"] = {"lbc", "magic"};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  j = to_json(small_config());
  j["snr_db"] = {"loud"};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  j = to_json(small_config());
  j["allocation"]["h"] = -1.0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  j = to_json(small_config());
  j["map"]["kind"] = "cave";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  j = to_json(small_config());
  j["low_fidelity_delta"] = 0.0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
}

TEST_CASE("experiment setup") {
  ScenarioConfig c = small_config();
  const Experiment e(c);
  CHECK(e.true_best().vertices.front() == e.source_vertex());
  CHECK(e.true_best().vertices.back() == e.target_vertex());
  CHECK(e.true_map().region_count() == 4);

  Cell wall{-1, -1};
  for (std::size_t i = 0; i < e.true_map().cell_count(); ++i) {
    if (e.true_map().nontraversable(i)) {
      wall = e.true_map().cell(i);
      break;
    }
  }
  REQUIRE(wall.x >= 0);
  c.source = wall;
  CHECK_THROWS_AS(Experiment{c}, ConfigError);
  c.source = Cell{100, 0};
  CHECK_THROWS(Experiment{c});
}

TEST_CASE("deltas per method") {
  const Experiment e(small_config());
  const auto lbc = e.deltas(Method::kLbc, 10.0);
  REQUIRE(lbc.size() == 4);
  double mean = 0.0;
  for (double d : lbc) {
    CHECK(d >= 0.05);
    CHECK(d <= 0.95);
    mean += d / 4.0;
  }
  for (double d : e.deltas(Method::kUniform, 10.0)) CHECK(d == doctest::Approx(mean));
  CHECK(e.deltas(Method::kLowFidelity, 10.0) == std::vector<double>(4, 0.2));
  CHECK(e.deltas(Method::kHighFidelity, 10.0) == std::vector<double>(4, 1.0));
  CHECK(e.lbc_allocation(10.0) == e.lbc_allocation(10.0));
}

TEST_CASE("a noiseless trial reproduces the true plan") {
  const Experiment e(small_config());
  const double inf = std::numeric_limits<double>::infinity();
  for (Method m : {Method::kLbc, Method::kUniform, Method::kLowFidelity, Method::kHighFidelity}) {
    const TrialRecord r = e.run_trial(m, inf, 17);
    CHECK_FALSE(r.failed);
    CHECK(r.exact_match);
    CHECK(r.weight_error == 0.0);
    CHECK(r.nontraversable_count == 0);
  }
}

TEST_CASE("trials are deterministic and respect their invariants") {
  const Experiment e(small_config());
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const TrialRecord a = e.run_trial(Method::kLowFidelity, 0.0, seed);
    const TrialRecord b = e.run_trial(Method::kLowFidelity, 0.0, seed);
    CHECK(a.weight_error == b.weight_error);
    CHECK(a.nontraversable_count == b.nontraversable_count);
    if (a.failed) {
      CHECK(a.nontraversable_count == kFailedCount);
      continue;
    }
    CHECK(a.weight_error >= 0.0);
    CHECK(a.nontraversable_count >= 0);
    if (a.exact_match) CHECK(a.weight_error == 0.0);
  }
}

TEST_CASE("sweep and aggregate") {
  ScenarioConfig c = small_config();
  c.methods = {Method::kLbc};
  c.snr_db = {10.0};
  c.trials = 1;
  const SweepResult one = Experiment(c).sweep();
  REQUIRE(one.records.size() == 1);
  CHECK(one.records[0].seed == trial_seed(c.seed, 0));

  c = small_config();
  const SweepResult r = Experiment(c).sweep();
  CHECK(r.records.size() == 4 * 2 * 3);
  CHECK(r.aggregates.size() == 4 * 2);
  for (const auto& row : r.aggregates) {
    double sum = 0.0;
    std::size_t n = 0, failures = 0;
    for (const auto& t : r.records) {
      if (t.method != row.method || t.snr_db != row.snr_db) continue;
      if (t.failed) {
        ++failures;
        continue;
      }
      sum += t.weight_error;
      ++n;
    }
    CHECK(row.n == n);
    CHECK(row.failures == failures);
    if (n > 0) CHECK(row.weight_error_mean == doctest::Approx(sum / static_cast<double>(n)));
  }
  // Trial seeds are shared across methods and SNRs.
  for (const auto& t : r.records) CHECK(t.seed == trial_seed(c.seed, t.trial));

  c.workers = 3;
  const SweepResult parallel = Experiment(c).sweep();
  std::ostringstream a, b;
  write_trials_csv(a, r.records);
  write_trials_csv(b, parallel.records);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("method,snr_db,trial,seed,failed,weight_error,nontraversable_count,exact_match,mean_delta\n",
                      0) == 0);
}

TEST_CASE("manifest") {
  const ScenarioConfig c = small_config();
  const json m = run_manifest(c, {"trials.csv"});
  CHECK(m.at("config_hash") == config_hash(c));
  CHECK(m.at("seed") == c.seed);
  CHECK(m.at("outputs") == json::array({"trials.csv"}));
}
