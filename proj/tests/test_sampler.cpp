#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "redress/graph.hpp"
#include "redress/rng.hpp"
#include "redress/sampler.hpp"

using namespace redress;

namespace {

Graph random_graph(std::size_t n, double p, RngStream& rng) {
  EdgeList edges;
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t v = u + 1; v < n; ++v) {
      if (rng.uniform() < p) edges.push_back({u, v});
    }
  }
  if (edges.empty()) edges.push_back({0, 1});
  return Graph::from_edges(n, edges);
}

Graph star(std::size_t leaves) {
  EdgeList edges;
  for (std::uint32_t v = 1; v <= leaves; ++v) edges.push_back({0, v});
  return Graph::from_edges(leaves + 1, edges);
}

}  // namespace

TEST_CASE("sample_neighbors keeps all neighbors when p covers the degree") {
  Graph g = star(3);
  RngStream rng(61);
  auto s = sample_neighbors(g, {0}, 5, rng);
  REQUIRE(s.size() == 1);
  std::vector<std::uint32_t> got = s[0];
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::uint32_t>{1, 2, 3});
}

TEST_CASE("sample_neighbors draws without replacement and within the true list") {
  RngStream rng(62);
  Graph g = random_graph(20, 0.4, rng);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint32_t> nodes;
    for (std::uint32_t u = 0; u < 20; ++u) nodes.push_back(u);
    const int p = 1 + static_cast<int>(rng.below(6));
    auto s = sample_neighbors(g, nodes, p, rng);
    REQUIRE(s.size() == nodes.size());
    for (std::uint32_t u = 0; u < 20; ++u) {
      CHECK(s[u].size() == std::min<std::size_t>(p, g.degree(u)));
      std::set<std::uint32_t> uniq(s[u].begin(), s[u].end());
      CHECK(uniq.size() == s[u].size());
      for (std::uint32_t v : s[u]) CHECK(g.has_edge(u, v));
    }
  }
}

TEST_CASE("sample_neighbors marginal frequency is uniform") {
  Graph g = star(10);
  std::map<std::uint32_t, int> counts;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(63, RngPurpose::kNeighborSample, static_cast<std::uint64_t>(t));
    auto s = sample_neighbors(g, {0}, 2, rng);
    for (std::uint32_t v : s[0]) ++counts[v];
  }
  for (std::uint32_t v = 1; v <= 10; ++v) {
    const double freq = counts[v] / static_cast<double>(trials);
    CHECK(freq == doctest::Approx(0.2).epsilon(0.05));
  }
}

TEST_CASE("sample_neighbors is seed-deterministic") {
  RngStream base(64);
  Graph g = random_graph(15, 0.5, base);
  std::vector<std::uint32_t> nodes = {0, 3, 7, 11};
  RngStream a(77, RngPurpose::kNeighborSample, 4, 2);
  RngStream b(77, RngPurpose::kNeighborSample, 4, 2);
  CHECK(sample_neighbors(g, nodes, 3, a) == sample_neighbors(g, nodes, 3, b));
}

TEST_CASE("build_blocks star forced cardinality") {
  Graph g = star(6);
  RngStream rng(65);
  LayeredSubgraph blocks = build_blocks(g, {0}, {1, 1}, rng);
  REQUIRE(blocks.level_nodes[2].size() == 1);
  CHECK(blocks.level_nodes[2][0] == 0);
  // the center plus exactly one sampled leaf at the middle level
  CHECK(blocks.level_nodes[1].size() == 2);
  // that leaf's own expansion can only re-add the center
  CHECK(blocks.level_nodes[0].size() <= 3);
  CHECK_NOTHROW(blocks.check_coverage());
}

TEST_CASE("build_blocks with covering fanout contains the full 2-hop neighborhood") {
  RngStream rng(66);
  Graph g = random_graph(15, 0.25, rng);
  LayeredSubgraph blocks = build_blocks(g, {0}, {50, 50}, rng);
  std::set<std::uint32_t> hop1(g.neighbors(0).begin(), g.neighbors(0).end());
  hop1.insert(0);
  std::set<std::uint32_t> hop2 = hop1;
  for (std::uint32_t v : hop1) {
    for (std::uint32_t w : g.neighbors(v)) hop2.insert(w);
  }
  CHECK(std::set<std::uint32_t>(blocks.level_nodes[1].begin(), blocks.level_nodes[1].end()) ==
        hop1);
  CHECK(std::set<std::uint32_t>(blocks.level_nodes[0].begin(), blocks.level_nodes[0].end()) ==
        hop2);
}

TEST_CASE("build_blocks coverage invariant on 100 random graphs") {
  RngStream rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    Graph g = random_graph(6 + rng.below(25), 0.3, rng);
    std::vector<std::uint32_t> seeds;
    const std::size_t ns = 1 + rng.below(4);
    for (std::size_t i = 0; i < ns; ++i) {
      seeds.push_back(static_cast<std::uint32_t>(rng.below(g.node_count())));
    }
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    const int f1 = 1 + static_cast<int>(rng.below(5));
    const int f2 = 1 + static_cast<int>(rng.below(5));
    LayeredSubgraph blocks = build_blocks(g, seeds, {f1, f2}, rng);
    CHECK_NOTHROW(blocks.check_coverage());
    // sampled edges are true edges
    for (int lvl = 0; lvl < 2; ++lvl) {
      for (std::size_t i = 0; i < blocks.sampled[lvl].size(); ++i) {
        const std::uint32_t u = blocks.level_nodes[lvl + 1][i];
        for (std::uint32_t slot : blocks.sampled[lvl][i]) {
          const std::uint32_t v = blocks.level_nodes[lvl][slot];
          CHECK(g.has_edge(u, v));
        }
        CHECK(blocks.sampled[lvl][i].size() ==
              std::min<std::size_t>(lvl == 0 ? f1 : f2, g.degree(u)));
      }
    }
  }
}

TEST_CASE("edge_minibatches chunk sizes and partition") {
  EdgeList edges;
  for (std::uint32_t i = 0; i < 100; ++i) edges.push_back({i, i + 1000});
  auto batches = edge_minibatches(edges, 32, 5);
  REQUIRE(batches.size() == 4);
  CHECK(batches[0].size() == 32);
  CHECK(batches[1].size() == 32);
  CHECK(batches[2].size() == 32);
  CHECK(batches[3].size() == 4);
  std::set<std::uint32_t> seen;
  for (const auto& b : batches) {
    for (const Edge& e : b) CHECK(seen.insert(e.u).second);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("edge_minibatches order changes with the epoch seed") {
  EdgeList edges;
  for (std::uint32_t i = 0; i < 64; ++i) edges.push_back({i, i + 100});
  auto a = edge_minibatches(edges, 16, 1);
  auto b = edge_minibatches(edges, 16, 1);
  auto c = edge_minibatches(edges, 16, 2);
  CHECK(a == b);
  CHECK(a != c);
  // same multiset regardless of order
  auto flatten = [](const std::vector<EdgeList>& bs) {
    std::multiset<std::uint32_t> all;
    for (const auto& batch : bs) {
      for (const Edge& e : batch) all.insert(e.u);
    }
    return all;
  };
  CHECK(flatten(a) == flatten(c));
}

TEST_CASE("attach_negatives counts, membership, and source preservation") {
  RngStream rng(68);
  Graph g = random_graph(30, 0.2, rng);
  EdgeList pos = g.undirected_edges();
  pos.resize(std::min<std::size_t>(pos.size(), 32));
  for (int ratio : {1, 3, 5}) {
    RngStream nr(69, RngPurpose::kTrainNegatives, ratio);
    EdgeList neg = attach_negatives(pos, g, ratio, nr);
    CHECK(neg.size() == pos.size() * static_cast<std::size_t>(ratio));
    for (std::size_t i = 0; i < neg.size(); ++i) {
      CHECK(neg[i].u == pos[i / ratio].u);  // source held fixed
      CHECK(neg[i].u != neg[i].v);
      CHECK(!g.has_edge(neg[i].u, neg[i].v));
    }
  }
}

TEST_CASE("attach_negatives is deterministic per stream key") {
  RngStream base(70);
  Graph g = random_graph(25, 0.25, base);
  EdgeList pos = g.undirected_edges();
  pos.resize(10);
  RngStream a(7, RngPurpose::kTrainNegatives, 3, 1);
  RngStream b(7, RngPurpose::kTrainNegatives, 3, 1);
  CHECK(attach_negatives(pos, g, 2, a) == attach_negatives(pos, g, 2, b));
}

TEST_CASE("make_minibatch covers every edge endpoint") {
  RngStream rng(71);
  Graph g = random_graph(40, 0.15, rng);
  EdgeList pos = g.undirected_edges();
  pos.resize(std::min<std::size_t>(pos.size(), 16));
  RngStream mb(9, RngPurpose::kNeighborSample, 0, 0);
  MiniBatch batch = make_minibatch(g, pos, 2, {3, 3}, {}, 4, mb);
  CHECK(batch.batch_index == 4);
  CHECK(batch.neg.size() == 2 * pos.size());
  CHECK_NOTHROW(batch.blocks.check_coverage());
  for (const Edge& e : batch.pos) {
    CHECK(batch.blocks.seed_slot.contains(e.u));
    CHECK(batch.blocks.seed_slot.contains(e.v));
  }
  for (const Edge& e : batch.neg) {
    CHECK(batch.blocks.seed_slot.contains(e.u));
    CHECK(batch.blocks.seed_slot.contains(e.v));
  }
}

TEST_CASE("make_minibatch includes requested extra seeds") {
  RngStream rng(72);
  Graph g = random_graph(30, 0.2, rng);
  EdgeList pos = {g.undirected_edges()[0]};
  std::vector<std::uint32_t> extra = {20, 25, 29};
  RngStream mb(10, RngPurpose::kNeighborSample, 0, 1);
  MiniBatch batch = make_minibatch(g, pos, 1, {2, 2}, extra, 0, mb);
  for (std::uint32_t u : extra) CHECK(batch.blocks.seed_slot.contains(u));
}
