#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "semplan/grid_map.hpp"

namespace semplan {

using VertexId = std::uint32_t;

inline constexpr double kDefaultKappa = 1.0;

/// Vertex cost of a cell with traversability tau: (kappa / tau)^2.
double vertex_cost(double tau, double kappa);

/// 8-connected graph over the traversable cells of a GridMap. Vertex ids follow
/// row-major cell order, so neighbour lists are sorted by id. Edge weights are
/// w(u, v) = c_u + c_v. Perturbed copies share the topology and differ only in
/// their cost vector.
class TravGraph {
 public:
  static TravGraph build(const GridMap& map, double kappa = kDefaultKappa);

  std::size_t vertex_count() const noexcept { return cost_.size(); }
  int width() const noexcept { return topo_->width; }
  int height() const noexcept { return topo_->height; }
  double kappa() const noexcept { return kappa_; }
  double cost_floor() const noexcept { return kappa_ * kappa_; }

  double cost(VertexId v) const { return cost_[v]; }
  std::span<const double> costs() const noexcept { return cost_; }
  double tau(VertexId v) const { return topo_->tau[v]; }

  std::span<const VertexId> neighbors(VertexId v) const {
    const auto b = topo_->offsets[v], e = topo_->offsets[v + 1];
    return {topo_->adjacency.data() + b, e - b};
  }
  std::size_t degree(VertexId v) const { return topo_->offsets[v + 1] - topo_->offsets[v]; }
  bool adjacent(VertexId u, VertexId v) const;

  /// w(u, v) = c_u + c_v. Throws if u and v are not adjacent.
  double edge_weight(VertexId u, VertexId v) const;

  Cell cell(VertexId v) const;
  std::size_t cell_index(VertexId v) const { return topo_->cell_of[v]; }
  std::optional<VertexId> vertex_at(Cell c) const;

  /// True when both graphs were built over the same set of traversable cells.
  bool same_topology(const TravGraph& other) const;

  /// Copy with a replacement cost vector (same topology).
  TravGraph with_costs(std::vector<double> costs) const;

 private:
  struct Topology {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> cell_of;     // vertex -> cell index
    std::vector<std::int64_t> vertex_of;    // cell index -> vertex or -1
    std::vector<std::size_t> offsets;       // CSR
    std::vector<VertexId> adjacency;
    std::vector<double> tau;
  };

  TravGraph(std::shared_ptr<const Topology> topo, double kappa, std::vector<double> cost)
      : topo_(std::move(topo)), kappa_(kappa), cost_(std::move(cost)) {}

  std::shared_ptr<const Topology> topo_;
  double kappa_;
  std::vector<double> cost_;
};

/// Per-vertex perturbation variances: in traversability units and in cost units.
struct VarianceField {
  std::vector<double> var_tau;
  std::vector<double> var_cost;

  /// Cost-space field only (var_tau left empty).
  static VarianceField from_cost(std::vector<double> var_cost);
  /// Same variance for every vertex of `graph`, in cost units.
  static VarianceField uniform_cost(const TravGraph& graph, double var_cost);
  /// Traversability-space field mapped to cost space by the delta method.
  static VarianceField from_tau(const TravGraph& graph, std::vector<double> var_tau);

  VarianceField scaled(double s) const;
  std::size_t size() const noexcept { return var_cost.size(); }
};

/// Delta-method cost variance: (dc/dtau)^2 var_tau = 4 kappa^4 / tau^6 * var_tau.
double cost_variance_from_tau(double tau, double var_tau, double kappa,
                              double tau_min = kDefaultTauMin);

/// Vertex-sum path weight W(p) = sum of c_u. Validates adjacency and simplicity.
double path_weight(const TravGraph& graph, std::span<const VertexId> path);

/// Additive Gaussian cost noise, eps_u ~ N(0, var_cost(u)), floored at kappa^2.
/// Deterministic per seed; draws one normal per vertex in id order.
TravGraph apply_perturbation(const TravGraph& graph, const VarianceField& field, std::uint64_t seed);

/// Debug exports: "u,v,weight" for u < v, and "id,x,y,cost".
void write_edge_csv(std::ostream& out, const TravGraph& graph);
void write_vertex_csv(std::ostream& out, const TravGraph& graph);

}  // namespace semplan
