#include "redress/synth.hpp"

#include <cmath>

#include "redress/rng.hpp"

namespace redress {

namespace {

double gaussian(RngStream& rng) {
  // Box-Muller; uniform() never returns exactly 1, so 1-u stays positive.
  const double u = 1.0 - rng.uniform();
  const double v = rng.uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

}  // namespace

Dataset make_synthetic(const SynthSpec& spec) {
  if (spec.nodes == 0 || spec.communities == 0 || spec.communities > spec.nodes) {
    throw ContractError("make_synthetic: bad node/community counts");
  }
  const std::size_t n = spec.nodes;
  const std::size_t csize = (n + spec.communities - 1) / spec.communities;
  auto community_of = [&](std::size_t i) { return i / csize; };

  RngStream edge_rng(spec.seed, RngPurpose::kSynthetic, 1);
  const double p_in =
      csize > 1 ? std::min(1.0, spec.intra_degree / static_cast<double>(csize - 1)) : 0.0;
  const double p_out =
      n > csize ? std::min(1.0, spec.inter_degree / static_cast<double>(n - csize)) : 0.0;
  // Pareto attachment weights (mean-normalized, capped) for degree skew.
  std::vector<double> w(n, 1.0);
  if (spec.hub_exponent > 0.0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = std::min(std::pow(1.0 - edge_rng.uniform(), -1.0 / spec.hub_exponent), 50.0);
      sum += w[i];
    }
    for (double& wi : w) wi *= static_cast<double>(n) / sum;
  }
  const std::size_t ngroups = spec.interest_groups;
  const double p_taste =
      ngroups > 0 && n > ngroups
          ? std::min(1.0, spec.taste_degree / (static_cast<double>(n) / ngroups - 1.0))
          : 0.0;
  EdgeList edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      double base = community_of(u) == community_of(v) ? p_in : p_out;
      if (ngroups > 0 && u % ngroups == v % ngroups) base += p_taste;
      const double p = std::min(1.0, base * w[u] * w[v]);
      if (edge_rng.uniform() < p) {
        edges.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
      }
    }
  }
  // Interest hubs: node g (g < ngroups) acts as the hub of group g and links
  // to its members directly.
  if (ngroups > 0 && spec.hub_link_prob > 0.0) {
    for (std::size_t i = ngroups; i < n; ++i) {
      if (edge_rng.uniform() < spec.hub_link_prob) {
        edges.push_back({static_cast<std::uint32_t>(i % ngroups), static_cast<std::uint32_t>(i)});
      }
    }
    // Hubs are popular: extra uniform edges push their degree well above the
    // community average.
    const auto extra = static_cast<std::size_t>(spec.hub_extra_degree);
    for (std::size_t g = 0; g < ngroups; ++g) {
      for (std::size_t t = 0; t < extra; ++t) {
        const auto v = static_cast<std::uint32_t>(edge_rng.below(n));
        if (v != g) edges.push_back({static_cast<std::uint32_t>(g), v});
      }
    }
  }
  // No isolated nodes: tie each one to a community mate (or neighbor id).
  std::vector<int> touched(n, 0);
  for (const Edge& e : edges) touched[e.u] = touched[e.v] = 1;
  for (std::size_t u = 0; u < n; ++u) {
    if (!touched[u]) {
      std::size_t v = u + 1 < n && community_of(u + 1) == community_of(u) ? u + 1
                      : u > 0                                             ? u - 1
                                                                          : u + 1;
      edges.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
      touched[u] = touched[v] = 1;
    }
  }

  RngStream feat_rng(spec.seed, RngPurpose::kSynthetic, 2);
  const std::size_t d = spec.feature_dim;
  DenseMatrix protos(spec.communities, d), grads(spec.communities, d);
  for (std::size_t c = 0; c < spec.communities; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      protos.at(c, j) = spec.proto_scale * gaussian(feat_rng);
      grads.at(c, j) = spec.grad_scale * gaussian(feat_rng);
    }
  }
  const std::size_t ng = ngroups;
  DenseMatrix tastes(ng, d);
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t j = 0; j < d; ++j) {
      tastes.at(g, j) = spec.taste_scale * gaussian(feat_rng);
    }
  }
  DenseMatrix x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = community_of(i);
    const double t = feat_rng.uniform();
    const double* taste = ng > 0 ? tastes.row(i % ng) : nullptr;
    const bool is_hub = ng > 0 && spec.hub_link_prob > 0.0 && i < ng;
    const double taste_gain =
        is_hub && spec.taste_scale > 0.0 ? spec.hub_taste_scale / spec.taste_scale : 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      x.at(i, j) = protos.at(c, j) + t * grads.at(c, j) + spec.noise_scale * gaussian(feat_rng) +
                   (taste ? taste_gain * taste[j] : 0.0);
    }
  }

  Dataset ds;
  ds.graph = Graph::from_edges(n, edges);
  ds.features = std::move(x);
  ds.meta.nodes = n;
  ds.meta.edges = ds.graph.edge_count();
  ds.meta.features = d;
  ds.meta.name = spec.name;
  return ds;
}

}  // namespace redress
