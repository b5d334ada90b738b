#pragma once

#include <array>
#include <cstdint>

#include "redress/graph.hpp"

namespace redress {

// Disjoint positive-edge partition plus fixed evaluation negatives.
struct EdgeSplit {
  EdgeList train_pos, val_pos, test_pos;
  EdgeList val_neg, test_neg;
  std::uint64_t seed = 0;
};

// Uniform rejection sampling of node pairs (u != v) absent from E and from
// `exclude`. No duplicates within one call. Throws DataError once attempts
// exceed 1000x count (graph too dense).
EdgeList sample_negative_edges(const Graph& g, std::size_t count,
                               const std::vector<const EdgeList*>& exclude, std::uint64_t seed);

// Seeded shuffle of the undirected edge list, then a contiguous partition by
// the given ratios (ratios must sum to 1). Negatives for val/test are sampled
// to match the positive set sizes.
EdgeSplit split_edges(const Graph& g, const std::array<double, 3>& ratios, std::uint64_t seed);

}  // namespace redress
