#pragma once

#include <vector>

namespace redress {

// Rank-based (Mann-Whitney) AUC over positive vs negative scores, ties
// counted 0.5. Returned as a percentage. Throws ContractError when either
// side is empty.
double auc_percent(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

}  // namespace redress
