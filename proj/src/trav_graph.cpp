#include "semplan/trav_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "semplan/format.hpp"
#include "semplan/rng.hpp"

namespace semplan {

double vertex_cost(double tau, double kappa) {
  const double r = kappa / tau;
  return r * r;
}

TravGraph TravGraph::build(const GridMap& map, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  auto topo = std::make_shared<Topology>();
  topo->width = map.width();
  topo->height = map.height();
  topo->vertex_of.assign(map.cell_count(), -1);
  for (std::size_t i = 0; i < map.cell_count(); ++i) {
    if (map.nontraversable(i)) continue;
    topo->vertex_of[i] = static_cast<std::int64_t>(topo->cell_of.size());
    topo->cell_of.push_back(static_cast<std::uint32_t>(i));
    topo->tau.push_back(map.tau(i));
  }
  if (topo->cell_of.empty()) throw std::invalid_argument("map has no traversable cells");

  const std::size_t n = topo->cell_of.size();
  topo->offsets.reserve(n + 1);
  topo->offsets.push_back(0);
  std::vector<double> cost(n);
  for (std::size_t v = 0; v < n; ++v) {
    const Cell c = map.cell(topo->cell_of[v]);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell nb{c.x + dx, c.y + dy};
        if (!map.contains(nb)) continue;
        const auto id = topo->vertex_of[map.index(nb)];
        if (id >= 0) topo->adjacency.push_back(static_cast<VertexId>(id));
      }
    }
    topo->offsets.push_back(topo->adjacency.size());
    cost[v] = vertex_cost(topo->tau[v], kappa);
  }
  return TravGraph(std::move(topo), kappa, std::move(cost));
}

bool TravGraph::adjacent(VertexId u, VertexId v) const {
  if (u >= vertex_count() || v >= vertex_count()) return false;
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

double TravGraph::edge_weight(VertexId u, VertexId v) const {
  if (!adjacent(u, v)) {
    throw std::invalid_argument("vertices " + std::to_string(u) + " and " + std::to_string(v) +
                                " are not adjacent");
  }
  return cost_[u] + cost_[v];
}

Cell TravGraph::cell(VertexId v) const {
  const auto i = topo_->cell_of[v];
  return {static_cast<int>(i % static_cast<std::uint32_t>(topo_->width)),
          static_cast<int>(i / static_cast<std::uint32_t>(topo_->width))};
}

std::optional<VertexId> TravGraph::vertex_at(Cell c) const {
  if (c.x < 0 || c.y < 0 || c.x >= topo_->width || c.y >= topo_->height) return std::nullopt;
  const auto id = topo_->vertex_of[static_cast<std::size_t>(c.y) * topo_->width + c.x];
  if (id < 0) return std::nullopt;
  return static_cast<VertexId>(id);
}

bool TravGraph::same_topology(const TravGraph& other) const {
  if (topo_ == other.topo_) return true;
  return topo_->width == other.topo_->width && topo_->height == other.topo_->height &&
         topo_->cell_of == other.topo_->cell_of;
}

TravGraph TravGraph::with_costs(std::vector<double> costs) const {
  if (costs.size() != vertex_count()) throw std::invalid_argument("cost vector size mismatch");
  return TravGraph(topo_, kappa_, std::move(costs));
}

VarianceField VarianceField::from_cost(std::vector<double> var_cost) {
  for (double v : var_cost) {
    if (!(v >= 0.0)) throw std::invalid_argument("variance must be non-negative");
  }
  return VarianceField{{}, std::move(var_cost)};
}

VarianceField VarianceField::uniform_cost(const TravGraph& graph, double var_cost) {
  return from_cost(std::vector<double>(graph.vertex_count(), var_cost));
}

VarianceField VarianceField::from_tau(const TravGraph& graph, std::vector<double> var_tau) {
  if (var_tau.size() != graph.vertex_count()) throw std::invalid_argument("variance field size mismatch");
  std::vector<double> var_cost(var_tau.size());
  for (VertexId v = 0; v < var_tau.size(); ++v) {
    // Vertices exist only for tau >= the map's tau_min; any positive floor is safe here.
    var_cost[v] = cost_variance_from_tau(graph.tau(v), var_tau[v], graph.kappa(), 0.0);
  }
  return VarianceField{std::move(var_tau), std::move(var_cost)};
}

VarianceField VarianceField::scaled(double s) const {
  if (!(s >= 0.0)) throw std::invalid_argument("scale must be non-negative");
  VarianceField out = *this;
  for (double& v : out.var_tau) v *= s;
  for (double& v : out.var_cost) v *= s;
  return out;
}

double cost_variance_from_tau(double tau, double var_tau, double kappa, double tau_min) {
  if (!(tau >= tau_min) || !(tau > 0.0) || tau > 1.0) {
    throw std::out_of_range("traversability below tau_min in delta-method conversion");
  }
  if (!(var_tau >= 0.0)) throw std::invalid_argument("variance must be non-negative");
  const double k2 = kappa * kappa;
  const double t3 = tau * tau * tau;
  return 4.0 * k2 * k2 / (t3 * t3) * var_tau;
}

double path_weight(const TravGraph& graph, std::span<const VertexId> path) {
  if (path.empty()) throw std::invalid_argument("empty path");
  std::vector<VertexId> seen(path.begin(), path.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw std::invalid_argument("path repeats a vertex");
  }
  if (seen.back() >= graph.vertex_count()) throw std::invalid_argument("path vertex out of range");
  double w = graph.cost(path[0]);
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (!graph.adjacent(path[i - 1], path[i])) {
      throw std::invalid_argument("path has non-adjacent consecutive vertices at step " +
                                  std::to_string(i));
    }
    w += graph.cost(path[i]);
  }
  return w;
}

TravGraph apply_perturbation(const TravGraph& graph, const VarianceField& field, std::uint64_t seed) {
  if (field.var_cost.size() != graph.vertex_count()) {
    throw std::invalid_argument("variance field does not cover the graph");
  }
  Rng rng(seed, Stream::kPerturb);
  std::vector<double> cost(graph.costs().begin(), graph.costs().end());
  const double floor = graph.cost_floor();
  for (std::size_t v = 0; v < cost.size(); ++v) {
    const double var = field.var_cost[v];
    if (!(var >= 0.0)) throw std::invalid_argument("negative variance in field");
    const double z = rng.normal();
    if (var == 0.0) continue;
    cost[v] = std::max(cost[v] + std::sqrt(var) * z, floor);
  }
  return graph.with_costs(std::move(cost));
}

void write_edge_csv(std::ostream& out, const TravGraph& graph) {
  out << "u,v,weight\n";
  for (VertexId u = 0; u < graph.vertex_count(); ++u) {
    for (VertexId v : graph.neighbors(u)) {
      if (v > u) out << u << ',' << v << ',' << format_double(graph.cost(u) + graph.cost(v)) << '\n';
    }
  }
}

void write_vertex_csv(std::ostream& out, const TravGraph& graph) {
  out << "id,x,y,cost\n";
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    const Cell c = graph.cell(v);
    out << v << ',' << c.x << ',' << c.y << ',' << format_double(graph.cost(v)) << '\n';
  }
}

}  // namespace semplan
