#include "redress/metrics.hpp"

#include <algorithm>

#include "redress/errors.hpp"

namespace redress {

double auc_percent(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw ContractError("auc: need at least one positive and one negative score");
  }
  // Average-rank formulation: AUC = (R_pos - n_pos(n_pos+1)/2) / (n_pos n_neg).
  std::vector<std::pair<double, int>> all;
  all.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) all.emplace_back(s, 1);
  for (double s : neg_scores) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    // Tied block [i, j) shares the average 1-based rank.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (all[t].second == 1) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(pos_scores.size());
  const double nn = static_cast<double>(neg_scores.size());
  const double auc = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
  return 100.0 * auc;
}

}  // namespace redress
