#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "redress/matrix.hpp"
#include "redress/models.hpp"

namespace redress {

// Cosine similarity over a vector space, node ids resolved through an
// optional embedding mapping. Zero-norm rows compare as 0.
class CosineSim {
 public:
  explicit CosineSim(const DenseMatrix& vectors);         // row i = node i
  explicit CosineSim(const Embeddings& emb);              // mapped rows

  double operator()(std::uint32_t u, std::uint32_t v) const;
  std::size_t zero_norm_rows() const { return zero_norms_; }

  std::uint32_t slot(std::uint32_t node) const;
  const DenseMatrix& matrix() const { return *m_; }
  double norm_of_slot(std::uint32_t s) const { return norms_[s]; }

 private:
  const DenseMatrix* m_;
  const Embeddings* emb_ = nullptr;
  std::vector<double> norms_;
  std::size_t zero_norms_ = 0;
};

// Per-anchor descending top-k similarity lists; ties break by ascending node
// id; the anchor itself is excluded.
struct RankedRow {
  std::vector<std::pair<std::uint32_t, double>> items;  // (node, similarity)
};

struct RankedSimilarity {
  std::size_t k = 0;
  std::vector<std::uint32_t> anchors;
  std::unordered_map<std::uint32_t, std::uint32_t> anchor_slot;
  std::vector<RankedRow> rows;

  const RankedRow& row_for(std::uint32_t anchor) const;
};

// Top-k over `candidates` (all nodes of the space when empty) per anchor.
RankedSimilarity cosine_topk(const CosineSim& space, std::size_t k,
                             const std::vector<std::uint32_t>& anchors,
                             const std::vector<std::uint32_t>& candidates = {});

// Convenience overload: rows of `vectors` are nodes, all-vs-all.
RankedSimilarity cosine_topk(const DenseMatrix& vectors, std::size_t k,
                             const std::vector<std::uint32_t>& anchors);

// Three-case step probability from the apriori similarities.
inline double apriori_probability(double s_ij, double s_im) {
  if (s_ij > s_im) return 1.0;
  if (s_ij == s_im) return 0.5;
  return 0.0;
}

// 1 / (1 + exp(-alpha (s_ij - s_im))).
double learned_probability(double s_ij, double s_im, double alpha);

// -P ln P_hat - (1-P) ln(1-P_hat), with P_hat clamped to [1e-12, 1-1e-12].
double pair_loss(double p, double p_hat);

// Gain and rank-discount conventions: gain(s) = 2^s - 1 and positions
// 0..k inclusive carry discount 1/log2(2+pos); later positions contribute 0.
double ndcg_gain(double s);
double ndcg_discount(std::size_t pos, std::size_t k);

// DCG over gains already in list order.
double dcg_at_k(const std::vector<double>& gains_in_order, std::size_t k);

// |change in NDCG@k| caused by swapping the learned-order positions of j and
// m. pos < 0 means the node sits outside the learned list (no discount).
double ndcg_delta(double gain_j, double gain_m, std::ptrdiff_t pos_j, std::ptrdiff_t pos_m,
                  double idcg, std::size_t k);

struct FairnessConfig {
  double alpha = 1.0;
  double gamma = 1.0;
  std::size_t k = 10;
};

struct FairnessResult {
  double loss = 0.0;         // mean over anchors of the pairwise weighted sum
  std::size_t pair_count = 0;
  std::size_t skipped_anchors = 0;  // zero IDCG
};

// NDCG-weighted pairwise cross-entropy loss over each anchor's candidate
// pool (union of apriori and learned top-k), with the gradient flowing
// through the learned cosine similarities only; ranks and |dNDCG| weights are
// constants of the current iterate. The gradient (scaled by 1/|anchors|, not
// by gamma) is accumulated into d_emb, row-aligned with emb.values.
//
// sg_topk rows must be at least k+1 deep (k for the pool, k+1 for IDCG);
// sy_topk rows are the learned orders over the candidate universe, at least
// k+1 deep.
FairnessResult fairness_loss_and_grad(const std::vector<std::uint32_t>& anchors,
                                      const RankedSimilarity& sg_topk,
                                      const RankedSimilarity& sy_topk, const CosineSim& apriori,
                                      const Embeddings& emb, const FairnessConfig& cfg,
                                      DenseMatrix& d_emb);

struct FairnessMetric {
  double mean_pct = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // IDCG == 0 nodes, counted but excluded from the mean
};

// Mean NDCG@k (as a percentage) of the learned ordering against apriori
// gains. Both rankings must be at least k+1 deep over the same exclusions.
FairnessMetric fairness_ndcg_metric(const RankedSimilarity& sg, const RankedSimilarity& sy,
                                    std::size_t k, const CosineSim& apriori);

// Audit dump: one line per anchor, "u: v1:s1, v2:s2, ...".
void dump_ranked(std::ostream& out, const RankedSimilarity& ranked);

}  // namespace redress
