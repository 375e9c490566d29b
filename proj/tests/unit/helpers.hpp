#pragma once

#include <string>
#include <vector>

#include "semplan/grid_map.hpp"
#include "semplan/trav_graph.hpp"

namespace semplan::test {

inline GridMap uniform_map(int w, int h, double tau = 1.0) {
  return GridMap(w, h, std::vector<double>(static_cast<std::size_t>(w * h), tau));
}

// Map from rows of characters: '#' obstacle, '.' tau 1, digits d give tau = d / 10.
inline GridMap ascii_map(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  std::vector<double> tau;
  for (const auto& r : rows) {
    for (char c : r) tau.push_back(c == '#' ? 0.0 : c == '.' ? 1.0 : (c - '0') / 10.0);
  }
  return GridMap(w, h, tau);
}

inline VertexId vid(const TravGraph& g, int x, int y) { return *g.vertex_at({x, y}); }

}  // namespace semplan::test
