#include "attackdet/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace attackdet {

DirectedGraph::DirectedGraph(int node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
  if (node_count_ <= 0) throw std::invalid_argument("graph: node_count must be positive");
  for (const auto& [from, to] : edges_) {
    if (from < 1 || from > node_count_ || to < 1 || to > node_count_)
      throw std::invalid_argument("graph: edge (" + std::to_string(from) + ", " + std::to_string(to) +
                                  ") references a node outside 1.." + std::to_string(node_count_));
    if (from == to) throw std::invalid_argument("graph: self-loop at node " + std::to_string(from));
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end())
    throw std::invalid_argument("graph: duplicate edge (" + std::to_string(dup->first) + ", " +
                                std::to_string(dup->second) + ")");
}

std::vector<int> in_neighbors(const DirectedGraph& g, int i) {
  if (i < 1 || i > g.node_count())
    throw std::out_of_range("graph: node index " + std::to_string(i) + " out of range");
  std::vector<int> out;
  for (const auto& [from, to] : g.edges())
    if (to == i) out.push_back(from);
  std::sort(out.begin(), out.end());
  return out;
}

Degrees degrees(const DirectedGraph& g) {
  Degrees d{Eigen::VectorXi::Zero(g.node_count()), Eigen::VectorXi::Zero(g.node_count())};
  for (const auto& [from, to] : g.edges()) {
    ++d.in(to - 1);
    ++d.out(from - 1);
  }
  return d;
}

}  // namespace attackdet
