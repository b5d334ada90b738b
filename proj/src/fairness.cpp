#include "redress/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "redress/errors.hpp"

namespace redress {

CosineSim::CosineSim(const DenseMatrix& vectors) : m_(&vectors) {
  norms_.resize(vectors.rows);
  for (std::size_t i = 0; i < vectors.rows; ++i) {
    norms_[i] = std::sqrt(dot(vectors.row_span(i), vectors.row_span(i)));
    if (norms_[i] == 0.0) ++zero_norms_;
  }
}

CosineSim::CosineSim(const Embeddings& emb) : m_(&emb.values), emb_(&emb) {
  norms_.resize(m_->rows);
  for (std::size_t i = 0; i < m_->rows; ++i) {
    norms_[i] = std::sqrt(dot(m_->row_span(i), m_->row_span(i)));
    if (norms_[i] == 0.0) ++zero_norms_;
  }
}

std::uint32_t CosineSim::slot(std::uint32_t node) const {
  if (emb_ != nullptr) return emb_->slot_of(node);
  if (node >= m_->rows) throw ContractError("cosine: node out of range");
  return node;
}

double CosineSim::operator()(std::uint32_t u, std::uint32_t v) const {
  const std::uint32_t su = slot(u), sv = slot(v);
  const double nu = norms_[su], nv = norms_[sv];
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot(m_->row_span(su), m_->row_span(sv)) / (nu * nv);
}

const RankedRow& RankedSimilarity::row_for(std::uint32_t anchor) const {
  auto it = anchor_slot.find(anchor);
  if (it == anchor_slot.end()) {
    throw ContractError("ranked similarity: no row for anchor " + std::to_string(anchor));
  }
  return rows[it->second];
}

RankedSimilarity cosine_topk(const CosineSim& space, std::size_t k,
                             const std::vector<std::uint32_t>& anchors,
                             const std::vector<std::uint32_t>& candidates) {
  if (k == 0) throw ContractError("cosine_topk: k must be >= 1");
  RankedSimilarity out;
  out.k = k;
  out.anchors = anchors;
  out.anchor_slot.reserve(anchors.size());
  out.rows.resize(anchors.size());

  std::vector<std::uint32_t> all;
  const std::vector<std::uint32_t>* cands = &candidates;
  if (candidates.empty()) {
    all.resize(space.matrix().rows);
    for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    cands = &all;
  }

  auto cmp = [](const std::pair<std::uint32_t, double>& a,
                const std::pair<std::uint32_t, double>& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };

  std::vector<std::pair<std::uint32_t, double>> sims;
  for (std::size_t ai = 0; ai < anchors.size(); ++ai) {
    const std::uint32_t u = anchors[ai];
    out.anchor_slot.emplace(u, static_cast<std::uint32_t>(ai));
    sims.clear();
    sims.reserve(cands->size());
    for (std::uint32_t v : *cands) {
      if (v == u) continue;
      sims.emplace_back(v, space(u, v));
    }
    const std::size_t take = std::min(k, sims.size());
    std::partial_sort(sims.begin(), sims.begin() + take, sims.end(), cmp);
    out.rows[ai].items.assign(sims.begin(), sims.begin() + take);
  }
  return out;
}

RankedSimilarity cosine_topk(const DenseMatrix& vectors, std::size_t k,
                             const std::vector<std::uint32_t>& anchors) {
  CosineSim space(vectors);
  return cosine_topk(space, k, anchors);
}

double learned_probability(double s_ij, double s_im, double alpha) {
  if (alpha <= 0.0) throw ContractError("learned_probability: alpha must be positive");
  return sigmoid(alpha * (s_ij - s_im));
}

double pair_loss(double p, double p_hat) {
  constexpr double kEps = 1e-12;
  const double q = std::clamp(p_hat, kEps, 1.0 - kEps);
  return -p * std::log(q) - (1.0 - p) * std::log(1.0 - q);
}

double ndcg_gain(double s) { return std::exp2(s) - 1.0; }

double ndcg_discount(std::size_t pos, std::size_t k) {
  if (pos > k) return 0.0;
  return 1.0 / std::log2(static_cast<double>(pos) + 2.0);
}

double dcg_at_k(const std::vector<double>& gains_in_order, std::size_t k) {
  double s = 0.0;
  const std::size_t limit = std::min(gains_in_order.size(), k + 1);
  for (std::size_t i = 0; i < limit; ++i) s += gains_in_order[i] * ndcg_discount(i, k);
  return s;
}

double ndcg_delta(double gain_j, double gain_m, std::ptrdiff_t pos_j, std::ptrdiff_t pos_m,
                  double idcg, std::size_t k) {
  if (idcg <= 0.0) return 0.0;
  const double dj = pos_j >= 0 ? ndcg_discount(static_cast<std::size_t>(pos_j), k) : 0.0;
  const double dm = pos_m >= 0 ? ndcg_discount(static_cast<std::size_t>(pos_m), k) : 0.0;
  return std::abs((gain_j - gain_m) * (dj - dm)) / idcg;
}

FairnessResult fairness_loss_and_grad(const std::vector<std::uint32_t>& anchors,
                                      const RankedSimilarity& sg_topk,
                                      const RankedSimilarity& sy_topk, const CosineSim& apriori,
                                      const Embeddings& emb, const FairnessConfig& cfg,
                                      DenseMatrix& d_emb) {
  if (!d_emb.same_shape(emb.values)) {
    throw DimensionError("fairness gradient: shape mismatch with embeddings");
  }
  if (anchors.empty()) return {};

  const std::size_t k = cfg.k;
  const std::size_t m = emb.values.cols;
  CosineSim learned(emb);

  FairnessResult res;
  const double inv_anchors = 1.0 / static_cast<double>(anchors.size());

  std::vector<std::uint32_t> pool;
  std::vector<double> s_ap, s_le, coeff;
  std::vector<std::ptrdiff_t> pos;

  for (std::uint32_t i : anchors) {
    const RankedRow& sg_row = sg_topk.row_for(i);
    const RankedRow& sy_row = sy_topk.row_for(i);

    // IDCG over the apriori ordering.
    double idcg = 0.0;
    for (std::size_t t = 0; t < std::min(sg_row.items.size(), k + 1); ++t) {
      idcg += ndcg_gain(sg_row.items[t].second) * ndcg_discount(t, k);
    }
    if (idcg <= 0.0) {
      ++res.skipped_anchors;
      continue;
    }

    // Candidate pool: union of the two top-k lists.
    pool.clear();
    for (std::size_t t = 0; t < std::min(sg_row.items.size(), k); ++t)
      pool.push_back(sg_row.items[t].first);
    for (std::size_t t = 0; t < std::min(sy_row.items.size(), k); ++t)
      pool.push_back(sy_row.items[t].first);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    const std::size_t n = pool.size();
    if (n < 2) continue;

    s_ap.resize(n);
    s_le.resize(n);
    pos.assign(n, -1);
    coeff.assign(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      s_ap[a] = apriori(i, pool[a]);
      s_le[a] = learned(i, pool[a]);
      for (std::size_t t = 0; t < sy_row.items.size(); ++t) {
        if (sy_row.items[t].first == pool[a]) {
          pos[a] = static_cast<std::ptrdiff_t>(t);
          break;
        }
      }
    }

    // All ordered pairs (j, m), j != m; d loss / d s_le accumulates in coeff.
    for (std::size_t a = 0; a < n; ++a) {
      const double gj = ndcg_gain(s_ap[a]);
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        const double gm = ndcg_gain(s_ap[b]);
        const double w = ndcg_delta(gj, gm, pos[a], pos[b], idcg, k);
        if (w == 0.0) continue;
        const double p = apriori_probability(s_ap[a], s_ap[b]);
        const double p_hat = learned_probability(s_le[a], s_le[b], cfg.alpha);
        res.loss += w * pair_loss(p, p_hat) * inv_anchors;
        ++res.pair_count;
        const double g = w * cfg.alpha * (p_hat - p) * inv_anchors;
        coeff[a] += g;
        coeff[b] -= g;
      }
    }

    // Chain through the cosine of the embeddings.
    const std::uint32_t si = emb.slot_of(i);
    const double ni = learned.norm_of_slot(si);
    if (ni == 0.0) continue;
    const double* yi = emb.values.row(si);
    double* di = d_emb.row(si);
    for (std::size_t a = 0; a < n; ++a) {
      if (coeff[a] == 0.0) continue;
      const std::uint32_t sj = emb.slot_of(pool[a]);
      const double nj = learned.norm_of_slot(sj);
      if (nj == 0.0) continue;
      const double* yj = emb.values.row(sj);
      double* dj = d_emb.row(sj);
      const double inv_ninj = 1.0 / (ni * nj);
      const double c = coeff[a];
      const double s = s_le[a];
      const double ci_self = c * s / (ni * ni);
      const double cj_self = c * s / (nj * nj);
      for (std::size_t t = 0; t < m; ++t) {
        di[t] += c * yj[t] * inv_ninj - ci_self * yi[t];
        dj[t] += c * yi[t] * inv_ninj - cj_self * yj[t];
      }
    }
  }
  return res;
}

FairnessMetric fairness_ndcg_metric(const RankedSimilarity& sg, const RankedSimilarity& sy,
                                    std::size_t k, const CosineSim& apriori) {
  FairnessMetric out;
  double total = 0.0;
  std::vector<double> gains;
  for (std::uint32_t u : sg.anchors) {
    const RankedRow& sg_row = sg.row_for(u);
    const RankedRow& sy_row = sy.row_for(u);

    gains.clear();
    for (const auto& [v, s] : sg_row.items) gains.push_back(ndcg_gain(s));
    const double idcg = dcg_at_k(gains, k);
    if (idcg <= 0.0) {
      ++out.skipped;
      continue;
    }

    gains.clear();
    for (const auto& [v, s_learned] : sy_row.items) gains.push_back(ndcg_gain(apriori(u, v)));
    const double dcg = dcg_at_k(gains, k);

    total += dcg / idcg;
    ++out.evaluated;
  }
  if (out.evaluated > 0) out.mean_pct = 100.0 * total / static_cast<double>(out.evaluated);
  return out;
}

void dump_ranked(std::ostream& out, const RankedSimilarity& ranked) {
  for (std::size_t i = 0; i < ranked.anchors.size(); ++i) {
    out << ranked.anchors[i] << ":";
    const auto& items = ranked.rows[i].items;
    for (std::size_t t = 0; t < items.size(); ++t) {
      out << (t == 0 ? " " : ", ") << items[t].first << ":" << items[t].second;
    }
    out << "\n";
  }
}

}  // namespace redress
