#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "semplan/trav_graph.hpp"

namespace semplan {

struct Path {
  std::vector<VertexId> vertices;
  double total_weight = 0.0;  // vertex-sum W(p)

  std::size_t size() const noexcept { return vertices.size(); }
  friend bool operator==(const Path&, const Path&) = default;
};

/// Minimum vertex-sum path. Relaxation adds c_v on entering v and the source
/// cost is counted once. Among equal-distance labels the smaller predecessor id
/// wins; the frontier pops smaller vertex ids first on equal distance.
/// Throws UnreachableError when no path exists.
Path dijkstra(const TravGraph& graph, VertexId source, VertexId target);

/// Every simple path from source to target with at most `max_vertices`
/// vertices, sorted by weight and then lexicographically. Refuses graphs above
/// `kEnumerationGuard` vertices unless `allow_large` is set.
inline constexpr std::size_t kEnumerationGuard = 20;
std::vector<Path> enumerate_simple_paths(const TravGraph& graph, VertexId source, VertexId target,
                                         std::size_t max_vertices, bool allow_large = false);

/// Path as cells, "step,x,y".
void write_path_csv(std::ostream& out, const TravGraph& graph, const Path& path);

}  // namespace semplan
