#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "redress/errors.hpp"

namespace redress {

struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

using EdgeList = std::vector<Edge>;

// Immutable undirected graph in CSR form. Both directions of every edge are
// stored; neighbor lists are sorted and duplicate-free; no self-loops.
class Graph {
 public:
  Graph() = default;

  // Builds from an undirected edge list. Duplicate undirected edges are
  // collapsed. Throws DataError on self-loops or out-of-range ids.
  static Graph from_edges(std::size_t node_count, const EdgeList& edges);

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edge_count_; }

  std::size_t degree(std::uint32_t u) const { return offsets_[u + 1] - offsets_[u]; }

  std::span<const std::uint32_t> neighbors(std::uint32_t u) const {
    return {neighbors_.data() + offsets_[u], degree(u)};
  }

  bool has_edge(std::uint32_t u, std::uint32_t v) const;

  // Undirected edge list with u < v, sorted.
  EdgeList undirected_edges() const;

  // Full-scan check of the CSR symmetry invariant; throws ContractError.
  void check_symmetry() const;

 private:
  std::size_t node_count_ = 0;
  std::size_t edge_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> neighbors_;
};

// Symmetric-normalization coefficients with self-loop-augmented degrees:
// cross(u,v) = 1/sqrt((deg(u)+1)(deg(v)+1)) aligned with the CSR slots of u,
// self(u) = 1/(deg(u)+1).
struct GcnNormCoeffs {
  std::vector<double> cross;  // neighbors_.size() entries, CSR-aligned
  std::vector<double> self;   // node_count entries
};

GcnNormCoeffs gcn_norm(const Graph& g);

}  // namespace redress
