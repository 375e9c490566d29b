#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "semplan/experiment.hpp"
#include "semplan/robustness.hpp"

using namespace semplan;
using test::vid;

TEST_CASE("xi maximum") {
  CHECK(xi_max() == doctest::Approx(0.24197072451914337).epsilon(1e-15));
  double best = 0.0, arg = 0.0;
  for (int k = 0; k <= 400'000; ++k) {
    const double z = k * 1e-5;
    const double xi = z * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    REQUIRE(xi <= xi_max() + 1e-12);
    if (xi > best) {
      best = xi;
      arg = z;
    }
  }
  CHECK(arg == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("path variance modes") {
  VarianceField zero = VarianceField::from_cost(std::vector<double>(6, 0.0));
  const Path p{{0, 1, 2}, 3.0};
  CHECK(path_variance(zero, p) == 0.0);
  VarianceField f = VarianceField::from_cost(std::vector<double>(6, 0.04));
  CHECK(path_variance(f, p) == doctest::Approx(0.12));
  VarianceField ones = VarianceField::from_cost(std::vector<double>(6, 1.0));
  const Path a{{0, 1, 2, 3}, 0}, b{{0, 1, 4, 3}, 0};
  CHECK(path_variance(ones, a) + path_variance(ones, b) == 8.0);
  CHECK(path_variance(ones, a, VarianceMode::kExact, &b) + path_variance(ones, b, VarianceMode::kExact, &a) == 2.0);
  CHECK_THROWS(path_variance(ones, a, VarianceMode::kExact));
  const Path far{{9}, 0};
  CHECK_THROWS(path_variance(ones, far));
}

TEST_CASE("pair probability") {
  CHECK(p_correct_pair(0.0, 1.0, 1.0) == 0.5);
  CHECK(p_correct_pair(2.0, 1.0, 3.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(p_correct_pair(2.0, 0.0, 0.0) == 1.0);
  CHECK(p_correct_pair(0.0, 0.0, 0.0) == 0.5);
  CHECK_THROWS(p_correct_pair(-1.0, 1.0, 1.0));
  CHECK_THROWS(p_correct_pair(1.0, -1.0, 1.0));
}

TEST_CASE("joint accuracy Q") {
  CHECK(q_accuracy({}) == 1.0);
  const std::vector<PathStats> two{PathStats::make(1.0, 0.5, 0.5), PathStats::make(1.0, 0.25, 0.75)};
  CHECK(q_accuracy(two) == doctest::Approx(0.707860981737141).epsilon(1e-13));
}

TEST_CASE("sensitivity xi") {
  CHECK(sensitivity_xi(2.0, 1.0, 3.0) == doctest::Approx(0.24197072451914337).epsilon(1e-14));
  CHECK(sensitivity_xi(0.0, 1.0, 1.0) == 0.0);
  CHECK(sensitivity_xi(4.0, 2.0, 2.0) == doctest::Approx(0.10798193302637613).epsilon(1e-13));
  CHECK(sensitivity_xi(1.0, 0.0, 0.0) == 0.0);
  const auto s = PathStats::make(2.0, 1.0, 3.0);
  CHECK(s.z == 1.0);
  CHECK(s.xi == doctest::Approx(xi_max()));
}

TEST_CASE("optimal variance closed form") {
  CHECK(optimal_candidate_variance(3.0, 4.0).value() == 5.0);
  CHECK_FALSE(optimal_candidate_variance(2.0, 4.0).has_value());
  CHECK_THROWS(optimal_candidate_variance(-1.0, 1.0));
}

TEST_CASE("where the pair term actually changes fastest") {
  // |d Phi(dw / sqrt(s + v)) / dv| = z phi(z) / (2 (s + v)) peaks at z = sqrt(3),
  // i.e. v = dw^2 / 3 - s. Scaling by (s + v) gives |z| phi(z), which peaks at
  // z = 1, i.e. v = dw^2 - s.
  const double dw = 3.0, s = 1.0;
  const auto scan = scan_optvar(dw, s);
  REQUIRE(scan.predicted.has_value());
  CHECK(*scan.predicted == 8.0);
  CHECK(scan.argmax_elasticity == doctest::Approx(8.0).epsilon(0.002));
  CHECK(scan.argmax_raw == doctest::Approx(dw * dw / 3.0 - s).epsilon(0.01));
  CHECK(scan.rel_dev_raw > 0.5);

  const auto infeasible = scan_optvar(1.0, 2.0);
  CHECK_FALSE(infeasible.predicted.has_value());
}

TEST_CASE("verify_optvar report") {
  OptVarVerifyParams params;
  params.pairs = 20;
  params.infeasible_pairs = 3;
  const auto report = verify_optvar(params);
  CHECK(report.scans.size() == 20);
  CHECK(report.infeasible == 3);
  CHECK(report.xi_max_analytic == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::e)));
  CHECK(std::abs(report.xi_max_scan - report.xi_max_analytic) < 1e-9);
  CHECK(report.max_rel_dev_elasticity <= 0.02);
  CHECK(report.max_rel_dev_raw > 0.02);
}

TEST_CASE("term and full derivatives agree with finite differences") {
  const std::vector<PathStats> st{PathStats::make(1.0, 0.4, 0.6), PathStats::make(2.0, 0.4, 1.5),
                                  PathStats::make(0.5, 0.4, 0.2)};
  const double h = 1e-6;
  for (std::size_t j = 0; j < st.size(); ++j) {
    auto bumped = st;
    bumped[j] = PathStats::make(st[j].delta_w, st[j].var_star, st[j].var_j + h);
    const double fd_full = (q_accuracy(bumped) - q_accuracy(st)) / h;
    CHECK(q_full_derivative(st, j) == doctest::Approx(fd_full).epsilon(1e-4));
    const double fd_term = (p_correct_pair(st[j].delta_w, st[j].var_star, st[j].var_j + h) -
                            p_correct_pair(st[j].delta_w, st[j].var_star, st[j].var_j)) /
                           h;
    CHECK(q_term_derivative(st[j]) == doctest::Approx(fd_term).epsilon(1e-4));
  }
}

TEST_CASE("property: Q never increases with any single variance, pair probability >= 0.5") {
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    std::vector<PathStats> st;
    for (int k = 0; k < 4; ++k) st.push_back(PathStats::make(3 * rng.uniform(), rng.uniform(), rng.uniform()));
    for (const auto& s : st) REQUIRE(p_correct_pair(s.delta_w, s.var_star, s.var_j) >= 0.5);
    const std::size_t j = rng.below(4);
    auto more = st;
    more[j] = PathStats::make(st[j].delta_w, st[j].var_star, st[j].var_j + rng.uniform());
    REQUIRE(q_accuracy(more) <= q_accuracy(st));
  }
}

TEST_CASE("candidate stats are sign-corrected and skip p*") {
  const TravGraph g = TravGraph::build(test::ascii_map({"...", ".5.", "..."}));
  const VertexId s = vid(g, 0, 1), t = vid(g, 2, 1);
  const auto paths = enumerate_simple_paths(g, s, t, 3);
  const Path best = dijkstra(g, s, t);
  const auto field = VarianceField::uniform_cost(g, 0.5);
  const auto st = candidate_stats(g, field, best, paths);
  CHECK(st.size() == paths.size() - 1);
  for (const auto& x : st) CHECK(x.delta_w >= 0.0);
}

// Two corridors of equal cost, noise only on their middle cells.
static TravGraph two_corridors() { return TravGraph::build(test::ascii_map({"11111", ".###.", "11111"})); }

TEST_CASE("mc accuracy: zero noise is exact") {
  const TravGraph g = TravGraph::build(generate_map(3, 8, 8, 0.1, 1));
  const auto est = mc_planning_accuracy(g, VarianceField::uniform_cost(g, 0.0), 0,
                                        static_cast<VertexId>(g.vertex_count() - 1), 50, 1);
  CHECK(est.accuracy == 1.0);
  CHECK(est.matches == 50);
}

TEST_CASE("mc accuracy: symmetric corridors split evenly") {
  const TravGraph g = two_corridors();
  std::vector<double> var(g.vertex_count(), 0.0);
  var[vid(g, 2, 0)] = 1.0;
  var[vid(g, 2, 2)] = 1.0;
  const auto est =
      mc_planning_accuracy(g, VarianceField::from_cost(var), vid(g, 0, 1), vid(g, 4, 1), 100'000, 2024, 2);
  CHECK(std::abs(est.accuracy - 0.5) <= 0.01);
  CHECK(est.wilson_lo < est.accuracy);
  CHECK(est.wilson_hi > est.accuracy);
}

TEST_CASE("mc accuracy does not increase with noise scale") {
  const TravGraph g = TravGraph::build(generate_map(9, 6, 6, 0.1, 1));
  const auto base = VarianceField::from_tau(g, std::vector<double>(g.vertex_count(), 0.01));
  double prev = 1.0;
  for (double scale : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const auto est = mc_planning_accuracy(g, base.scaled(scale), 0, static_cast<VertexId>(g.vertex_count() - 1),
                                          20'000, 8);
    CHECK(est.accuracy <= prev + 2.0 * est.std_error + 1e-12);
    prev = est.accuracy;
  }
}

TEST_CASE("mc accuracy is independent of worker count") {
  const TravGraph g = TravGraph::build(generate_map(2, 6, 6, 0.1, 1));
  const auto f = VarianceField::uniform_cost(g, 2.0);
  const auto a = mc_planning_accuracy(g, f, 0, static_cast<VertexId>(g.vertex_count() - 1), 2000, 4, 1);
  const auto b = mc_planning_accuracy(g, f, 0, static_cast<VertexId>(g.vertex_count() - 1), 2000, 4, 3);
  CHECK(a.matches == b.matches);
}

TEST_CASE("accuracy sweep rows") {
  const TravGraph g = TravGraph::build(test::uniform_map(3, 3));
  const auto paths = enumerate_simple_paths(g, 0, 8, 4);
  const std::vector<double> scales{0.0, 1.0};
  const auto rows = accuracy_sweep(g, VarianceField::uniform_cost(g, 0.1), 0, 8, paths, scales, 500, 3);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].q_analytic == 1.0);
  CHECK(rows[0].q_mc == 1.0);
  CHECK(rows[1].q_analytic < 1.0);
}
