#include "redress/split.hpp"

#include <cmath>
#include <unordered_set>

#include "redress/rng.hpp"

namespace redress {

namespace {
inline std::uint64_t pair_key(std::uint32_t u, std::uint32_t v, std::size_t n) {
  if (u > v) std::swap(u, v);
  return static_cast<std::uint64_t>(u) * n + v;
}
}  // namespace

EdgeList sample_negative_edges(const Graph& g, std::size_t count,
                               const std::vector<const EdgeList*>& exclude, std::uint64_t seed) {
  const std::size_t n = g.node_count();
  std::unordered_set<std::uint64_t> taboo;
  for (const EdgeList* list : exclude) {
    for (const Edge& e : *list) taboo.insert(pair_key(e.u, e.v, n));
  }
  RngStream rng(seed, RngPurpose::kEvalNegatives);
  EdgeList out;
  out.reserve(count);
  std::unordered_set<std::uint64_t> chosen;
  std::size_t attempts = 0;
  const std::size_t max_attempts = count * 1000;
  while (out.size() < count) {
    if (++attempts > max_attempts) {
      throw DataError("sample_negative_edges: rejection budget exhausted after " +
                      std::to_string(attempts) + " attempts (graph too dense)");
    }
    const auto u = static_cast<std::uint32_t>(rng.below(n));
    const auto v = static_cast<std::uint32_t>(rng.below(n));
    if (u == v) continue;
    if (g.has_edge(u, v)) continue;
    const std::uint64_t key = pair_key(u, v, n);
    if (taboo.contains(key) || !chosen.insert(key).second) continue;
    out.push_back(u < v ? Edge{u, v} : Edge{v, u});
  }
  return out;
}

EdgeSplit split_edges(const Graph& g, const std::array<double, 3>& ratios, std::uint64_t seed) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ContractError("split_edges: ratios must sum to 1");
  }
  EdgeList edges = g.undirected_edges();
  RngStream rng(seed, RngPurpose::kSplit);
  rng.shuffle(edges);

  const std::size_t total = edges.size();
  const auto n_train = static_cast<std::size_t>(std::llround(ratios[0] * total));
  const auto n_val = static_cast<std::size_t>(std::llround(ratios[1] * total));

  EdgeSplit s;
  s.seed = seed;
  s.train_pos.assign(edges.begin(), edges.begin() + n_train);
  s.val_pos.assign(edges.begin() + n_train, edges.begin() + n_train + n_val);
  s.test_pos.assign(edges.begin() + n_train + n_val, edges.end());
  s.val_neg = sample_negative_edges(g, s.val_pos.size(), {}, seed * 2 + 1);
  s.test_neg = sample_negative_edges(g, s.test_pos.size(), {&s.val_neg}, seed * 2 + 2);
  return s;
}

}  // namespace redress
