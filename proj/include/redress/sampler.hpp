#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "redress/graph.hpp"
#include "redress/rng.hpp"

namespace redress {

// Per-layer neighbor sample sizes for two-layer GraphSAGE. layer1 feeds the
// first convolution (raw features), layer2 the second.
struct Fanout {
  int layer1 = 0;
  int layer2 = 0;
};

// Nested sampled subgraph for a two-layer model.
//
// Levels, innermost first:
//   level 0: nodes whose raw features are needed,
//   level 1: nodes whose first-layer embedding is computed (= layer-2 inputs),
//   level 2: seed nodes (final embeddings).
// level2 nodes are a subset of level1, which is a subset of level0.
struct LayeredSubgraph {
  std::vector<std::uint32_t> level_nodes[3];            // global ids, per level
  std::vector<std::uint32_t> self_in_prev[2];           // [0]: level1->level0 slot, [1]: level2->level1 slot
  std::vector<std::vector<std::uint32_t>> sampled[2];   // [0]: per level1 node, slots into level0
                                                        // [1]: per level2 node, slots into level1
  std::unordered_map<std::uint32_t, std::uint32_t> seed_slot;  // global id -> level2 slot

  // Throws ContractError if the nesting/coverage invariants are violated.
  void check_coverage() const;
};

// Uniform sample WITHOUT replacement of min(p, degree) neighbors per node.
std::vector<std::vector<std::uint32_t>> sample_neighbors(const Graph& g,
                                                         const std::vector<std::uint32_t>& nodes,
                                                         int p, RngStream& rng);

// Samples the layer-2 neighborhoods of the seeds, then the layer-1
// neighborhoods of their union.
LayeredSubgraph build_blocks(const Graph& g, const std::vector<std::uint32_t>& seeds,
                             const Fanout& fanout, RngStream& rng);

// Degenerate blocks over the full graph: every node, full neighborhoods.
// Used for evaluation-time inference.
LayeredSubgraph full_blocks(const Graph& g);

// Seeded per-epoch shuffle, contiguous chunks, final partial batch kept.
std::vector<EdgeList> edge_minibatches(const EdgeList& train_pos, std::size_t batch_size,
                                       std::uint64_t epoch_seed);

// For each positive (u,v): neg_ratio corrupted pairs (u,w), w uniform over
// nodes with w != u and (u,w) not in E. Throws DataError on saturation.
EdgeList attach_negatives(const EdgeList& positives, const Graph& g, int neg_ratio,
                          RngStream& rng);

struct MiniBatch {
  EdgeList pos;
  EdgeList neg;
  LayeredSubgraph blocks;
  std::size_t batch_index = 0;
};

// Assembles a full mini-batch: negatives, seed set (edge endpoints plus any
// extra seeds the fairness pass needs in-batch), sampled blocks.
MiniBatch make_minibatch(const Graph& g, const EdgeList& pos, int neg_ratio, const Fanout& fanout,
                         const std::vector<std::uint32_t>& extra_seeds, std::size_t batch_index,
                         RngStream& rng);

}  // namespace redress
