#include "semplan/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "semplan/format.hpp"
#include "semplan/parallel.hpp"
#include "semplan/rng.hpp"
#include "semplan/stats.hpp"

namespace semplan {

namespace {

void check_inputs(double delta_w, double var_star, double var_j) {
  if (!(delta_w >= 0.0) || !(var_star >= 0.0) || !(var_j >= 0.0)) {
    throw std::invalid_argument("gap and variances must be non-negative");
  }
}

}  // namespace

double xi_max() { return 1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::e); }

PathStats PathStats::make(double delta_w, double var_star, double var_j) {
  check_inputs(delta_w, var_star, var_j);
  PathStats s{delta_w, var_star, var_j, 0.0, 0.0};
  const double total = var_star + var_j;
  if (total > 0.0) {
    s.z = delta_w / std::sqrt(total);
  } else {
    s.z = delta_w > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  s.xi = sensitivity_xi(delta_w, var_star, var_j);
  return s;
}

double path_variance(const VarianceField& field, const Path& path, VarianceMode mode, const Path* reference) {
  if (mode == VarianceMode::kExact && reference == nullptr) {
    throw std::invalid_argument("exact variance mode needs a reference path");
  }
  std::vector<VertexId> shared;
  if (mode == VarianceMode::kExact) {
    shared = reference->vertices;
    std::sort(shared.begin(), shared.end());
  }
  double total = 0.0;
  for (VertexId v : path.vertices) {
    if (v >= field.var_cost.size()) throw std::out_of_range("variance field does not cover path vertex");
    if (mode == VarianceMode::kExact && std::binary_search(shared.begin(), shared.end(), v)) continue;
    total += field.var_cost[v];
  }
  return total;
}

double p_correct_pair(double delta_w, double var_star, double var_j) {
  check_inputs(delta_w, var_star, var_j);
  const double total = var_star + var_j;
  if (total == 0.0) return delta_w > 0.0 ? 1.0 : 0.5;
  return stats::normal_cdf(delta_w / std::sqrt(total));
}

double q_accuracy(std::span<const PathStats> stats) {
  double q = 1.0;
  for (const auto& s : stats) q *= p_correct_pair(s.delta_w, s.var_star, s.var_j);
  return q;
}

double sensitivity_xi(double delta_w, double var_star, double var_j) {
  check_inputs(delta_w, var_star, var_j);
  const double total = var_star + var_j;
  if (total == 0.0) return 0.0;
  const double z = delta_w / std::sqrt(total);
  return std::abs(z) * stats::normal_pdf(z);
}

std::optional<double> optimal_candidate_variance(double delta_w, double var_star) {
  check_inputs(delta_w, var_star, 0.0);
  const double v = delta_w * delta_w - var_star;
  if (v > 0.0) return v;
  return std::nullopt;
}

double q_term_derivative(const PathStats& s) {
  const double total = s.var_star + s.var_j;
  if (total <= 0.0) return 0.0;
  const double z = s.delta_w / std::sqrt(total);
  return -0.5 * z * stats::normal_pdf(z) / total;
}

double q_full_derivative(std::span<const PathStats> stats, std::size_t j) {
  if (j >= stats.size()) throw std::out_of_range("candidate index out of range");
  double others = 1.0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (i != j) others *= p_correct_pair(stats[i].delta_w, stats[i].var_star, stats[i].var_j);
  }
  return others * q_term_derivative(stats[j]);
}

std::vector<PathStats> candidate_stats(const TravGraph& graph, const VarianceField& field, const Path& best,
                                       std::span<const Path> candidates, VarianceMode mode) {
  const double w_star = path_weight(graph, best.vertices);
  std::vector<PathStats> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.vertices == best.vertices) continue;
    const double w_j = path_weight(graph, c.vertices);
    const double var_star = path_variance(field, best, mode, &c);
    const double var_j = path_variance(field, c, mode, &best);
    out.push_back(PathStats::make(std::max(0.0, w_j - w_star), var_star, var_j));
  }
  return out;
}

AccuracyEstimate mc_planning_accuracy(const TravGraph& graph, const VarianceField& field, VertexId source,
                                      VertexId target, std::size_t trials, std::uint64_t seed,
                                      std::size_t workers) {
  if (trials == 0) throw std::invalid_argument("need at least one trial");
  const Path reference = dijkstra(graph, source, target);
  std::vector<char> hit(trials, 0);
  parallel_for(trials, workers, [&](std::size_t i) {
    const TravGraph perturbed = apply_perturbation(graph, field, derive_seed(seed, i));
    hit[i] = dijkstra(perturbed, source, target).vertices == reference.vertices ? 1 : 0;
  });
  AccuracyEstimate est;
  est.trials = trials;
  est.matches = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  const double n = static_cast<double>(trials);
  est.accuracy = static_cast<double>(est.matches) / n;
  est.std_error = std::sqrt(est.accuracy * (1.0 - est.accuracy) / n);
  const auto ci = stats::wilson_interval(est.matches, trials);
  est.wilson_lo = ci.lo;
  est.wilson_hi = ci.hi;
  return est;
}

std::vector<AccuracySweepRow> accuracy_sweep(const TravGraph& graph, const VarianceField& field, VertexId source,
                                             VertexId target, std::span<const Path> candidates,
                                             std::span<const double> scales, std::size_t trials,
                                             std::uint64_t seed, std::size_t workers) {
  const Path best = dijkstra(graph, source, target);
  std::vector<AccuracySweepRow> rows;
  rows.reserve(scales.size());
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const VarianceField scaled = field.scaled(scales[k]);
    const auto cs = candidate_stats(graph, scaled, best, candidates);
    const auto mc = mc_planning_accuracy(graph, scaled, source, target, trials, derive_seed(seed, k), workers);
    rows.push_back({scales[k], q_accuracy(cs), mc.accuracy, mc.std_error});
  }
  return rows;
}

void write_accuracy_csv(std::ostream& out, std::span<const AccuracySweepRow> rows) {
  out << "scale,q_analytic,q_mc,stderr\n";
  for (const auto& r : rows) {
    out << format_double(r.scale) << ',' << format_double(r.q_analytic) << ',' << format_double(r.q_mc) << ','
        << format_double(r.std_error) << '\n';
  }
}

OptVarScan scan_optvar(double delta_w, double var_star, const OptVarScanParams& params) {
  OptVarScan out;
  out.delta_w = delta_w;
  out.var_star = var_star;
  out.predicted = optimal_candidate_variance(delta_w, var_star);
  if (!out.predicted) return out;

  const double predicted = *out.predicted;
  const double h = params.fd_step;
  auto term = [&](double v) { return stats::normal_cdf(delta_w / std::sqrt(var_star + v)); };

  double best_raw = -1.0, best_el = -1.0;
  for (std::size_t k = 1; k <= params.grid_points; ++k) {
    const double v = static_cast<double>(k) * params.grid_step_rel * predicted;
    const double slope = std::abs(term(v + h) - term(v)) / h;
    const double elasticity = (var_star + v) * slope;
    if (slope > best_raw) {
      best_raw = slope;
      out.argmax_raw = v;
    }
    if (elasticity > best_el) {
      best_el = elasticity;
      out.argmax_elasticity = v;
    }
  }
  out.rel_dev_raw = std::abs(out.argmax_raw - predicted) / predicted;
  out.rel_dev_elasticity = std::abs(out.argmax_elasticity - predicted) / predicted;
  return out;
}

}  // namespace semplan
