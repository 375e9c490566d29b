#include "semplan/planner.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

#include "semplan/error.hpp"

namespace semplan {

Path dijkstra(const TravGraph& graph, VertexId source, VertexId target) {
  const std::size_t n = graph.vertex_count();
  if (source >= n || target >= n) throw std::out_of_range("dijkstra endpoint out of range");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr VertexId kNone = std::numeric_limits<VertexId>::max();
  std::vector<double> dist(n, kInf);
  std::vector<VertexId> pred(n, kNone);
  std::vector<char> done(n, 0);

  using Entry = std::pair<double, VertexId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  dist[source] = graph.cost(source);
  frontier.emplace(dist[source], source);

  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == target) break;
    for (VertexId v : graph.neighbors(u)) {
      const double nd = d + graph.cost(v);
      if (nd < dist[v]) {
        dist[v] = nd;
        pred[v] = u;
        frontier.emplace(nd, v);
      } else if (nd == dist[v] && u < pred[v] && v != source) {
        pred[v] = u;
      }
    }
  }
  if (!done[target]) {
    throw UnreachableError("target vertex " + std::to_string(target) + " unreachable from " +
                           std::to_string(source));
  }

  Path path;
  for (VertexId v = target; v != kNone; v = pred[v]) path.vertices.push_back(v);
  std::reverse(path.vertices.begin(), path.vertices.end());
  path.total_weight = dist[target];
  return path;
}

std::vector<Path> enumerate_simple_paths(const TravGraph& graph, VertexId source, VertexId target,
                                         std::size_t max_vertices, bool allow_large) {
  const std::size_t n = graph.vertex_count();
  if (!allow_large && n > kEnumerationGuard) {
    throw std::invalid_argument("enumeration refused: " + std::to_string(n) + " vertices exceeds guard of " +
                                std::to_string(kEnumerationGuard));
  }
  if (source >= n || target >= n) throw std::out_of_range("enumeration endpoint out of range");

  std::vector<Path> out;
  if (max_vertices == 0) return out;
  std::vector<VertexId> stack{source};
  std::vector<double> prefix{graph.cost(source)};
  std::vector<char> on_path(n, 0);
  on_path[source] = 1;

  // Iterative DFS; `cursor[i]` is the next neighbour index to try from stack[i].
  std::vector<std::size_t> cursor{0};
  if (source == target) {
    out.push_back(Path{{source}, prefix.back()});
  } else {
    while (!stack.empty()) {
      const VertexId u = stack.back();
      const auto nb = graph.neighbors(u);
      std::size_t& next = cursor.back();
      if (stack.size() >= max_vertices || next >= nb.size()) {
        on_path[u] = 0;
        stack.pop_back();
        prefix.pop_back();
        cursor.pop_back();
        continue;
      }
      const VertexId v = nb[next++];
      if (on_path[v]) continue;
      const double w = prefix.back() + graph.cost(v);
      if (v == target) {
        Path p{stack, w};
        p.vertices.push_back(v);
        out.push_back(std::move(p));
        continue;
      }
      stack.push_back(v);
      prefix.push_back(w);
      cursor.push_back(0);
      on_path[v] = 1;
    }
  }
  std::sort(out.begin(), out.end(), [](const Path& a, const Path& b) {
    if (a.total_weight != b.total_weight) return a.total_weight < b.total_weight;
    return a.vertices < b.vertices;
  });
  return out;
}

void write_path_csv(std::ostream& out, const TravGraph& graph, const Path& path) {
  out << "step,x,y\n";
  for (std::size_t i = 0; i < path.vertices.size(); ++i) {
    const Cell c = graph.cell(path.vertices[i]);
    out << i << ',' << c.x << ',' << c.y << '\n';
  }
}

}  // namespace semplan
