#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "redress/graph.hpp"
#include "redress/matrix.hpp"
#include "redress/rng.hpp"
#include "redress/sampler.hpp"

namespace redress {

// Final-layer node embeddings with their global-id mapping.
struct Embeddings {
  DenseMatrix values;
  std::vector<std::uint32_t> nodes;                            // row -> global id
  std::unordered_map<std::uint32_t, std::uint32_t> node_slot;  // global id -> row

  static Embeddings full(DenseMatrix v);  // identity mapping, row i = node i
  static Embeddings mapped(DenseMatrix v, std::vector<std::uint32_t> node_ids);

  std::uint32_t slot_of(std::uint32_t node) const;
  std::span<const double> of(std::uint32_t node) const {
    return values.row_span(slot_of(node));
  }
};

// Â H with self-loop-augmented symmetric normalization; summation per row is
// self term first, then neighbors in ascending id order.
DenseMatrix gcn_aggregate(const Graph& g, const GcnNormCoeffs& norm, const DenseMatrix& h);

// Two-layer GCN: H1 = ReLU(Â X W1 + b1), out = Â H1 W2 + b2. The final layer
// is linear; embeddings feed dot-product and cosine heads.
class GcnModel {
 public:
  ParamTensor w1, w2, b1, b2;
  bool use_bias = true;
  double dropout = 0.0;

  GcnModel(ParamTensor w1_in, ParamTensor w2_in, ParamTensor b1_in, ParamTensor b2_in)
      : w1(std::move(w1_in)), w2(std::move(w2_in)), b1(std::move(b1_in)), b2(std::move(b2_in)) {}

  static GcnModel init(std::size_t in_dim, std::size_t hidden, std::uint64_t seed,
                       bool use_bias = true);

  // cache=true retains activations for a following backward().
  Embeddings forward(const Graph& g, const GcnNormCoeffs& norm, const DenseMatrix& x,
                     bool cache = false, RngStream* dropout_rng = nullptr);

  // Accumulates parameter gradients for the cached forward. Throws
  // ContractError when no cache is present.
  void backward(const Graph& g, const GcnNormCoeffs& norm, const DenseMatrix& d_out);

  std::vector<ParamTensor*> params();

 private:
  bool cached_ = false;
  DenseMatrix ax_, pre1_, h1_, ah1_;
  std::vector<double> drop_mask_;
};

// Two-layer GraphSAGE with the self-inclusive mean aggregator:
// h_u = act(W * MEAN({h_u} u {h_v : v sampled})), ReLU after layer 1 only.
class SageModel {
 public:
  ParamTensor w1, w2, b1, b2;
  bool use_bias = true;
  double dropout = 0.0;

  SageModel(ParamTensor w1_in, ParamTensor w2_in, ParamTensor b1_in, ParamTensor b2_in)
      : w1(std::move(w1_in)), w2(std::move(w2_in)), b1(std::move(b1_in)), b2(std::move(b2_in)) {}

  static SageModel init(std::size_t in_dim, std::size_t hidden, std::uint64_t seed,
                        bool use_bias = true);

  // x is the full |V| x d feature matrix; rows are gathered via the block's
  // level-0 ids. Returns embeddings for the block's seed nodes.
  Embeddings forward(const LayeredSubgraph& blocks, const DenseMatrix& x, bool cache = false,
                     RngStream* dropout_rng = nullptr);

  void backward(const LayeredSubgraph& blocks, const DenseMatrix& d_out);

  std::vector<ParamTensor*> params();

 private:
  bool cached_ = false;
  DenseMatrix m1_, pre1_, h1_, m2_;
  std::vector<double> drop_mask_;
};

// sigmoid(dot(emb[u], emb[v])) per pair. Throws ContractError on a node id
// absent from the embedding mapping.
std::vector<double> link_logits(const Embeddings& emb, const EdgeList& pairs);
std::vector<double> score_links(const Embeddings& emb, const EdgeList& pairs);

struct UtilityLoss {
  double loss = 0.0;
  std::vector<double> grad_scores;
};

// Mean binary cross-entropy over probabilities (eps-clamped at 1e-12) with
// the gradient taken with respect to the scores.
UtilityLoss utility_loss(const std::vector<double>& scores, const std::vector<int>& labels);

// Training path: BCE through the logits for stability. Accumulates the
// embedding gradient into d_emb (same shape as emb.values) and returns the
// mean loss over all pos+neg pairs.
double utility_loss_backward(const Embeddings& emb, const EdgeList& pos, const EdgeList& neg,
                             DenseMatrix& d_emb);

// Binary checkpoint: header (model kind, shapes, seed, bias flag) + row-major
// doubles. Write -> read round trip is bit-exact.
struct Checkpoint {
  std::string model;  // "gcn" | "graphsage"
  std::uint64_t seed = 0;
  bool use_bias = true;
  std::size_t in_dim = 0;
  std::size_t hidden = 0;
  std::vector<DenseMatrix> tensors;  // w1, b1, w2, b2
};

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint snapshot_gcn(const GcnModel& m, std::uint64_t seed);
Checkpoint snapshot_sage(const SageModel& m, std::uint64_t seed);
void restore_gcn(GcnModel& m, const Checkpoint& c);
void restore_sage(SageModel& m, const Checkpoint& c);

}  // namespace redress
