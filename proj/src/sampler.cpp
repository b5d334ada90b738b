#include "redress/sampler.hpp"

#include <algorithm>

namespace redress {

namespace {

std::vector<std::uint32_t> sorted_unique(std::vector<std::uint32_t> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

std::unordered_map<std::uint32_t, std::uint32_t> index_of(const std::vector<std::uint32_t>& xs) {
  std::unordered_map<std::uint32_t, std::uint32_t> m;
  m.reserve(xs.size());
  for (std::uint32_t i = 0; i < xs.size(); ++i) m.emplace(xs[i], i);
  return m;
}

}  // namespace

void LayeredSubgraph::check_coverage() const {
  for (int l = 0; l < 2; ++l) {
    const auto& outer = level_nodes[l + 1];
    const auto& inner = level_nodes[l];
    if (self_in_prev[l].size() != outer.size() || sampled[l].size() != outer.size()) {
      throw ContractError("blocks: per-node arrays out of sync at level " + std::to_string(l + 1));
    }
    for (std::size_t i = 0; i < outer.size(); ++i) {
      const std::uint32_t slot = self_in_prev[l][i];
      if (slot >= inner.size() || inner[slot] != outer[i]) {
        throw ContractError("blocks: level " + std::to_string(l + 1) +
                            " node not covered by level " + std::to_string(l));
      }
      for (std::uint32_t s : sampled[l][i]) {
        if (s >= inner.size()) {
          throw ContractError("blocks: sampled slot out of range at level " + std::to_string(l));
        }
      }
    }
  }
  for (const auto& [node, slot] : seed_slot) {
    if (slot >= level_nodes[2].size() || level_nodes[2][slot] != node) {
      throw ContractError("blocks: seed_slot map inconsistent");
    }
  }
}

std::vector<std::vector<std::uint32_t>> sample_neighbors(const Graph& g,
                                                         const std::vector<std::uint32_t>& nodes,
                                                         int p, RngStream& rng) {
  std::vector<std::vector<std::uint32_t>> out(nodes.size());
  std::vector<std::uint32_t> pool;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto ns = g.neighbors(nodes[i]);
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(p), ns.size());
    if (take == ns.size()) {
      out[i].assign(ns.begin(), ns.end());
      continue;
    }
    pool.assign(ns.begin(), ns.end());
    // Partial Fisher-Yates: first `take` slots become the sample.
    for (std::size_t j = 0; j < take; ++j) {
      const std::size_t k = j + static_cast<std::size_t>(rng.below(pool.size() - j));
      std::swap(pool[j], pool[k]);
    }
    out[i].assign(pool.begin(), pool.begin() + take);
  }
  return out;
}

LayeredSubgraph build_blocks(const Graph& g, const std::vector<std::uint32_t>& seeds,
                             const Fanout& fanout, RngStream& rng) {
  if (fanout.layer1 < 1 || fanout.layer2 < 1) {
    throw ContractError("build_blocks: fanouts must be >= 1");
  }
  LayeredSubgraph b;
  b.level_nodes[2] = sorted_unique(seeds);

  auto sampled2 = sample_neighbors(g, b.level_nodes[2], fanout.layer2, rng);
  std::vector<std::uint32_t> l1 = b.level_nodes[2];
  for (const auto& ns : sampled2) l1.insert(l1.end(), ns.begin(), ns.end());
  b.level_nodes[1] = sorted_unique(std::move(l1));

  auto sampled1 = sample_neighbors(g, b.level_nodes[1], fanout.layer1, rng);
  std::vector<std::uint32_t> l0 = b.level_nodes[1];
  for (const auto& ns : sampled1) l0.insert(l0.end(), ns.begin(), ns.end());
  b.level_nodes[0] = sorted_unique(std::move(l0));

  const auto idx0 = index_of(b.level_nodes[0]);
  const auto idx1 = index_of(b.level_nodes[1]);

  b.self_in_prev[0].resize(b.level_nodes[1].size());
  b.sampled[0].resize(b.level_nodes[1].size());
  for (std::size_t i = 0; i < b.level_nodes[1].size(); ++i) {
    b.self_in_prev[0][i] = idx0.at(b.level_nodes[1][i]);
    auto& s = b.sampled[0][i];
    s.reserve(sampled1[i].size());
    for (std::uint32_t v : sampled1[i]) s.push_back(idx0.at(v));
  }

  b.self_in_prev[1].resize(b.level_nodes[2].size());
  b.sampled[1].resize(b.level_nodes[2].size());
  for (std::size_t i = 0; i < b.level_nodes[2].size(); ++i) {
    b.self_in_prev[1][i] = idx1.at(b.level_nodes[2][i]);
    auto& s = b.sampled[1][i];
    s.reserve(sampled2[i].size());
    for (std::uint32_t v : sampled2[i]) s.push_back(idx1.at(v));
  }

  b.seed_slot = index_of(b.level_nodes[2]);
  return b;
}

LayeredSubgraph full_blocks(const Graph& g) {
  const std::size_t n = g.node_count();
  LayeredSubgraph b;
  std::vector<std::uint32_t> all(n);
  for (std::uint32_t i = 0; i < n; ++i) all[i] = i;
  for (int l = 0; l < 3; ++l) b.level_nodes[l] = all;
  for (int l = 0; l < 2; ++l) {
    b.self_in_prev[l] = all;
    b.sampled[l].resize(n);
    for (std::uint32_t u = 0; u < n; ++u) {
      const auto ns = g.neighbors(u);
      b.sampled[l][u].assign(ns.begin(), ns.end());
    }
  }
  b.seed_slot = index_of(all);
  return b;
}

std::vector<EdgeList> edge_minibatches(const EdgeList& train_pos, std::size_t batch_size,
                                       std::uint64_t epoch_seed) {
  if (batch_size == 0) throw ContractError("edge_minibatches: batch_size must be >= 1");
  EdgeList shuffled = train_pos;
  RngStream rng(epoch_seed, RngPurpose::kBatchShuffle);
  rng.shuffle(shuffled);
  std::vector<EdgeList> batches;
  for (std::size_t start = 0; start < shuffled.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, shuffled.size());
    batches.emplace_back(shuffled.begin() + start, shuffled.begin() + end);
  }
  return batches;
}

EdgeList attach_negatives(const EdgeList& positives, const Graph& g, int neg_ratio,
                          RngStream& rng) {
  if (neg_ratio < 1) throw ContractError("attach_negatives: neg_ratio must be >= 1");
  const std::size_t n = g.node_count();
  EdgeList negs;
  negs.reserve(positives.size() * static_cast<std::size_t>(neg_ratio));
  for (const Edge& e : positives) {
    for (int r = 0; r < neg_ratio; ++r) {
      std::size_t attempts = 0;
      for (;;) {
        if (++attempts > 1000) {
          throw DataError("attach_negatives: no non-edge found for node " + std::to_string(e.u));
        }
        const auto w = static_cast<std::uint32_t>(rng.below(n));
        if (w == e.u || g.has_edge(e.u, w)) continue;
        negs.push_back({e.u, w});
        break;
      }
    }
  }
  return negs;
}

MiniBatch make_minibatch(const Graph& g, const EdgeList& pos, int neg_ratio, const Fanout& fanout,
                         const std::vector<std::uint32_t>& extra_seeds, std::size_t batch_index,
                         RngStream& rng) {
  MiniBatch mb;
  mb.pos = pos;
  mb.batch_index = batch_index;
  mb.neg = attach_negatives(pos, g, neg_ratio, rng);
  std::vector<std::uint32_t> seeds;
  seeds.reserve(pos.size() * 2 + mb.neg.size() * 2 + extra_seeds.size());
  for (const Edge& e : pos) {
    seeds.push_back(e.u);
    seeds.push_back(e.v);
  }
  for (const Edge& e : mb.neg) {
    seeds.push_back(e.u);
    seeds.push_back(e.v);
  }
  seeds.insert(seeds.end(), extra_seeds.begin(), extra_seeds.end());
  mb.blocks = build_blocks(g, seeds, fanout, rng);
  return mb;
}

}  // namespace redress
