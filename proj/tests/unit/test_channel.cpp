#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "helpers.hpp"
#include "semplan/channel.hpp"
#include "semplan/error.hpp"
#include "semplan/rng.hpp"
#include "semplan/stats.hpp"

using namespace semplan;

TEST_CASE("nominal variance formula") {
  ChannelProfile p;
  p.sigma0_sq = 0.1;
  CHECK(nominal_tau_variance(p, 1.0, 0.0) == doctest::Approx(0.1));
  p.sigma0_sq = 0.25;
  p.beta = 4.0;
  // 0.25 * (1 + 4 * 0.5) * 0.1
  CHECK(nominal_tau_variance(p, 0.5, 10.0) == doctest::Approx(0.075));
  CHECK(nominal_tau_variance(p, 0.5, std::numeric_limits<double>::infinity()) == 0.0);
  CHECK_THROWS_AS(nominal_tau_variance(p, 0.0, 0.0), std::out_of_range);
  CHECK_THROWS_AS(nominal_tau_variance(p, 1.5, 0.0), std::out_of_range);
}

TEST_CASE("property: variance decreases in delta and snr") {
  ChannelProfile p;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double d1 = 0.01 + 0.98 * rng.uniform(), d2 = d1 + (1.0 - d1) * rng.uniform();
    const double s1 = 30.0 * rng.uniform(), s2 = s1 + 5.0 * rng.uniform();
    REQUIRE(nominal_tau_variance(p, d2, s1) <= nominal_tau_variance(p, d1, s1));
    REQUIRE(nominal_tau_variance(p, d1, s2) <= nominal_tau_variance(p, d1, s1));
  }
}

TEST_CASE("transmit: zero noise and infinite snr leave the map untouched") {
  const GridMap map = partition_regions(generate_map(2, 12, 12, 0.2, 1), 2, 2);
  const std::vector<double> delta(4, 0.5);
  ChannelProfile quiet;
  quiet.sigma0_sq = 0.0;
  CHECK(transmit_map(map, delta, 0.0, quiet, 3) == map);
  ChannelProfile p;
  CHECK(transmit_map(map, delta, std::numeric_limits<double>::infinity(), p, 3) == map);
}

TEST_CASE("transmit: deterministic, clamped, and delta-checked") {
  const GridMap map = partition_regions(generate_map(2, 12, 12, 0.2, 1), 2, 2);
  const std::vector<double> delta{0.2, 0.4, 0.6, 1.0};
  ChannelProfile p;
  p.kind = ChannelKind::kRayleigh;
  const GridMap a = transmit_map(map, delta, 0.0, p, 9);
  const GridMap b = transmit_map(map, delta, 0.0, p, 9);
  CHECK(a == b);
  CHECK(a != transmit_map(map, delta, 0.0, p, 10));
  for (double t : a.tau_values()) {
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
  }
  CHECK(a.region_count() == map.region_count());
  CHECK_THROWS(transmit_map(map, std::vector<double>{0.5, 0.5}, 0.0, p, 1));
  CHECK_THROWS(transmit_map(map, std::vector<double>{0.5, 0.5, 0.0, 0.5}, 0.0, p, 1));
}

TEST_CASE("transmit: per-region residual moments match the formula") {
  // tau = 0.5 everywhere and a small variance so clamping never triggers.
  const GridMap map = partition_regions(test::uniform_map(100, 100, 0.5), 2, 2);
  const std::vector<double> delta{0.1, 0.4, 0.7, 1.0};
  ChannelProfile p;
  p.sigma0_sq = 0.01;
  std::vector<double> sum(4, 0.0), sq(4, 0.0);
  std::vector<std::size_t> n(4, 0);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const GridMap r = transmit_map(map, delta, 10.0, p, seed);
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
      const double e = r.tau(i) - 0.5;
      const auto k = map.region_of(i);
      sum[k] += e;
      sq[k] += e * e;
      ++n[k];
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    const double expected = nominal_tau_variance(p, delta[k], 10.0);
    const double mean = sum[k] / static_cast<double>(n[k]);
    const double var = sq[k] / static_cast<double>(n[k]) - mean * mean;
    CHECK(std::abs(mean) < 4.0 * std::sqrt(expected / static_cast<double>(n[k])));
    CHECK(var == doctest::Approx(expected).epsilon(0.03));
  }
}

TEST_CASE("rayleigh gains") {
  ChannelProfile awgn;
  CHECK(fading_gains(awgn, 5, 1) == std::vector<double>(5, 1.0));

  ChannelProfile ray;
  ray.kind = ChannelKind::kRayleigh;
  const auto g = fading_gains(ray, 1'000'000, 2);
  double sum = 0.0;
  for (double x : g) {
    CHECK(x <= 1.0 / ray.gamma_floor);
    CHECK(x > 0.0);
    sum += x;
  }
  // E[1 / max(G, 0.05)] for G ~ Exp(1): 20 (1 - e^-0.05) + E1(0.05) = 3.4433
  const double expected = 20.0 * (1.0 - std::exp(-0.05)) + 2.467898488509974;
  CHECK(sum / 1e6 == doctest::Approx(expected).epsilon(0.01));
  CHECK(sum / 1e6 > 1.0);
  CHECK(fading_gains(ray, 4, 7) == fading_gains(ray, 4, 7));
}

TEST_CASE("variance field maps tau variance through the delta method") {
  const GridMap map = partition_regions(test::uniform_map(4, 4, 0.5), 2, 2);
  const TravGraph g = TravGraph::build(map);
  ChannelProfile p;
  const std::vector<double> delta{1.0, 1.0, 0.5, 0.5};
  const auto f = variance_field(map, g, delta, 0.0, p, 1);
  CHECK(f.var_tau[test::vid(g, 0, 0)] == doctest::Approx(0.1));
  CHECK(f.var_tau[test::vid(g, 0, 3)] == doctest::Approx(0.3));
  CHECK(f.var_cost[test::vid(g, 0, 0)] == doctest::Approx(cost_variance_from_tau(0.5, 0.1, 1.0)));
}

TEST_CASE("calibration table") {
  std::stringstream ss("delta,snr_db,sigma_tau_sq\n0.5,0,0.4\n0.5,10,0.2\n1.0,0,0.2\n1.0,10,0.1\n");
  const auto t = CalibrationTable::read_csv(ss);
  CHECK(t.lookup(0.5, 0.0) == doctest::Approx(0.4));
  CHECK(t.lookup(0.75, 5.0) == doctest::Approx(0.225));
  CHECK(t.lookup(0.1, -5.0) == doctest::Approx(0.4));
  CHECK(t.lookup(2.0, 50.0) == doctest::Approx(0.1));

  ChannelProfile p;
  p.calibration = t;
  CHECK(nominal_tau_variance(p, 1.0, 10.0) == doctest::Approx(0.1));

  std::stringstream ragged("delta,snr_db,sigma_tau_sq\n0.5,0,0.4\n0.5,10,0.2\n1.0,0,0.2\n");
  CHECK_THROWS_AS(CalibrationTable::read_csv(ragged), ParseError);
  std::stringstream dup("delta,snr_db,sigma_tau_sq\n0.5,0,0.4\n0.5,0,0.4\n");
  CHECK_THROWS_AS(CalibrationTable::read_csv(dup), ParseError);
  std::stringstream garbage("delta,snr_db,sigma_tau_sq\nx\n");
  CHECK_THROWS_AS(CalibrationTable::read_csv(garbage), ParseError);
}

TEST_CASE("channel kind names") {
  CHECK(channel_kind_from_string("awgn") == ChannelKind::kAwgn);
  CHECK(channel_kind_from_string(to_string(ChannelKind::kRayleigh)) == ChannelKind::kRayleigh);
  CHECK_THROWS(channel_kind_from_string("rician"));
}
