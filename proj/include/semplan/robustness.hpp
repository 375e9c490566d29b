#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "semplan/planner.hpp"
#include "semplan/trav_graph.hpp"

namespace semplan {

/// Largest value of |z| phi(z), attained at |z| = 1: 1 / sqrt(2 pi e).
double xi_max();

/// Comparison of one candidate path p_j against the optimum p*.
/// delta_w = W(p_j) - W(p*) >= 0 (the optimum is never heavier than a candidate).
struct PathStats {
  double delta_w = 0.0;
  double var_star = 0.0;
  double var_j = 0.0;
  double z = 0.0;
  double xi = 0.0;

  static PathStats make(double delta_w, double var_star, double var_j);
};

enum class VarianceMode {
  kOwnVertices,  // sum of Var(eps_u) over the path's own vertices
  kExact,  // only vertices not shared with the reference path
};

/// Sum of var_cost over `path` (own-vertices mode) or over the vertices of `path` that
/// are not on `reference` (exact mode; shared vertices cancel in the gap).
double path_variance(const VarianceField& field, const Path& path, VarianceMode mode = VarianceMode::kOwnVertices,
                     const Path* reference = nullptr);

/// P(p* stays shorter than p_j) = Phi(delta_w / sqrt(var_star + var_j)).
/// With zero total variance: 1 if delta_w > 0, 0.5 if delta_w == 0.
double p_correct_pair(double delta_w, double var_star, double var_j);

/// Product of p_correct_pair over all candidates; 1 for an empty set.
double q_accuracy(std::span<const PathStats> stats);

/// xi = |z| phi(z); 0 in the zero-variance limit.
double sensitivity_xi(double delta_w, double var_star, double var_j);

/// delta_w^2 - var_star when positive, otherwise nullopt (no candidate variance
/// puts the comparison at |z| = 1).
std::optional<double> optimal_candidate_variance(double delta_w, double var_star);

/// d/d var_j of the candidate's own factor Phi(z_j) (always <= 0).
double q_term_derivative(const PathStats& s);

/// d Q / d var_j of the full product: the term derivative times all other factors.
double q_full_derivative(std::span<const PathStats> stats, std::size_t j);

/// Builds PathStats for every candidate other than `best` using vertex-sum
/// weights from `graph` and variances from `field`.
std::vector<PathStats> candidate_stats(const TravGraph& graph, const VarianceField& field, const Path& best,
                                       std::span<const Path> candidates,
                                       VarianceMode mode = VarianceMode::kOwnVertices);

struct AccuracyEstimate {
  double accuracy = 0.0;
  double std_error = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 1.0;
  std::size_t matches = 0;
  std::size_t trials = 0;
};

/// Fraction of perturbed replanning trials whose Dijkstra path equals the
/// unperturbed one (vertex sequence equality). Trial i uses seed derive(seed, i).
AccuracyEstimate mc_planning_accuracy(const TravGraph& graph, const VarianceField& field, VertexId source,
                                      VertexId target, std::size_t trials, std::uint64_t seed,
                                      std::size_t workers = 1);

/// Finite-difference scan of the optimal candidate variance for one
/// (delta_w, var_star) pair. The grid is var_j = k * step_rel * prediction for
/// k = 1 .. grid_points, and the derivative uses an absolute step `fd_step`.
/// Analytic Q against the Monte-Carlo oracle with the variance field scaled by
/// each entry of `scales`. Scale k uses oracle seed derive_seed(seed, k).
struct AccuracySweepRow {
  double scale = 0.0;
  double q_analytic = 0.0;
  double q_mc = 0.0;
  double std_error = 0.0;
};

std::vector<AccuracySweepRow> accuracy_sweep(const TravGraph& graph, const VarianceField& field, VertexId source,
                                             VertexId target, std::span<const Path> candidates,
                                             std::span<const double> scales, std::size_t trials,
                                             std::uint64_t seed, std::size_t workers = 1);

/// "scale,q_analytic,q_mc,stderr".
void write_accuracy_csv(std::ostream& out, std::span<const AccuracySweepRow> rows);

struct OptVarScan {
  double delta_w = 0.0;
  double var_star = 0.0;
  std::optional<double> predicted;   // delta_w^2 - var_star
  double argmax_raw = 0.0;           // argmax |f(v + h) - f(v)| / h, f(v) = Phi(dw / sqrt(var_star + v))
  double argmax_elasticity = 0.0;    // argmax (var_star + v) |f(v + h) - f(v)| / h
  double rel_dev_raw = 0.0;
  double rel_dev_elasticity = 0.0;
};

struct OptVarScanParams {
  double fd_step = 1e-4;
  double grid_step_rel = 1e-3;
  std::size_t grid_points = 10000;
};

OptVarScan scan_optvar(double delta_w, double var_star, const OptVarScanParams& params = {});

}  // namespace semplan
