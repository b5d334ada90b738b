#include "redress/graph.hpp"

#include <algorithm>
#include <cmath>

namespace redress {

Graph Graph::from_edges(std::size_t node_count, const EdgeList& edges) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> directed;
  directed.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.u == e.v) {
      throw DataError("graph: self-loop at node " + std::to_string(e.u));
    }
    if (e.u >= node_count || e.v >= node_count) {
      throw DataError("graph: edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                      ") out of range for " + std::to_string(node_count) + " nodes");
    }
    directed.emplace_back(e.u, e.v);
    directed.emplace_back(e.v, e.u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.node_count_ = node_count;
  g.edge_count_ = directed.size() / 2;
  g.offsets_.assign(node_count + 1, 0);
  g.neighbors_.reserve(directed.size());
  for (const auto& [u, v] : directed) {
    g.offsets_[u + 1]++;
    g.neighbors_.push_back(v);
  }
  for (std::size_t i = 0; i < node_count; ++i) g.offsets_[i + 1] += g.offsets_[i];
  return g;
}

bool Graph::has_edge(std::uint32_t u, std::uint32_t v) const {
  auto ns = neighbors(u);
  return std::binary_search(ns.begin(), ns.end(), v);
}

EdgeList Graph::undirected_edges() const {
  EdgeList out;
  out.reserve(edge_count_);
  for (std::uint32_t u = 0; u < node_count_; ++u) {
    for (std::uint32_t v : neighbors(u)) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

void Graph::check_symmetry() const {
  for (std::uint32_t u = 0; u < node_count_; ++u) {
    auto ns = neighbors(u);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (i > 0 && ns[i] == ns[i - 1]) {
        throw ContractError("graph: duplicate neighbor " + std::to_string(ns[i]) + " at node " +
                            std::to_string(u));
      }
      if (ns[i] == u) throw ContractError("graph: stored self-loop at node " + std::to_string(u));
      if (!has_edge(ns[i], u)) {
        throw ContractError("graph: asymmetric edge (" + std::to_string(u) + "," +
                            std::to_string(ns[i]) + ")");
      }
    }
  }
}

GcnNormCoeffs gcn_norm(const Graph& g) {
  GcnNormCoeffs c;
  c.self.resize(g.node_count());
  c.cross.reserve(2 * g.edge_count());
  for (std::uint32_t u = 0; u < g.node_count(); ++u) {
    const double du = static_cast<double>(g.degree(u)) + 1.0;
    c.self[u] = 1.0 / du;
    for (std::uint32_t v : g.neighbors(u)) {
      const double dv = static_cast<double>(g.degree(v)) + 1.0;
      c.cross.push_back(1.0 / std::sqrt(du * dv));
    }
  }
  return c;
}

}  // namespace redress
