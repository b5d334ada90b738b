#pragma once

#include <cstdint>
#include <string>

#include "redress/dataset.hpp"

namespace redress {

// Community-structured benchmark graph with planted feature similarity.
//
// Nodes are split into equal contiguous communities that drive the edge
// distribution. Features carry two planted signals:
//   - a community component (prototype + t_i * gradient, t_i uniform per
//     node) aligned with the graph structure, and
//   - an interest-group component, assigned round-robin and independent of
//     community, that shapes apriori cosine similarity without influencing
//     the edges.
// Link prediction only needs the community component, so embeddings trained
// for utility alone rank poorly against the apriori (feature) similarity;
// the interest signal stays recoverable from the input features.
struct SynthSpec {
  std::string name = "synth";
  std::size_t nodes = 1000;
  std::size_t communities = 20;
  std::size_t interest_groups = 0;  // 0 disables the interest component
  std::size_t feature_dim = 64;
  double intra_degree = 20.0;   // expected within-community degree
  double inter_degree = 2.0;    // expected cross-community degree
  double taste_degree = 0.0;    // expected extra degree toward same-interest nodes
  double proto_scale = 1.0;
  double grad_scale = 1.0;
  double taste_scale = 1.0;     // interest-group prototype scale
  double hub_link_prob = 0.0;   // >0 links each node to its group's hub node
  double hub_taste_scale = 0.0; // taste magnitude of hub nodes
  double hub_extra_degree = 0.0;  // extra uniform-random edges per hub
  double noise_scale = 0.35;
  double hub_exponent = 0.0;    // >0 draws Pareto attachment weights (smaller = heavier tail)
  std::uint64_t seed = 7;
};

Dataset make_synthetic(const SynthSpec& spec);

}  // namespace redress
