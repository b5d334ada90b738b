#include "redress/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "redress/errors.hpp"
#include "redress/rng.hpp"

namespace redress {

double finite_difference_check(const std::function<double()>& loss,
                               const std::vector<ParamTensor*>& params, double h,
                               std::size_t max_coords_per_param, std::uint64_t sample_seed) {
  if (h <= 0.0) throw ContractError("finite_difference_check: h must be positive");
  double worst = 0.0;
  RngStream rng(sample_seed, RngPurpose::kGradCheck);
  for (ParamTensor* p : params) {
    const std::size_t n = p->value.values.size();
    std::vector<std::size_t> coords;
    if (n <= max_coords_per_param) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      for (std::size_t i = 0; i < max_coords_per_param; ++i)
        coords.push_back(static_cast<std::size_t>(rng.below(n)));
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    }
    for (std::size_t c : coords) {
      const double saved = p->value.values[c];
      p->value.values[c] = saved + h;
      const double lp = loss();
      p->value.values[c] = saved - h;
      const double lm = loss();
      p->value.values[c] = saved;
      if (!std::isfinite(lp) || !std::isfinite(lm)) {
        throw NumericError("finite_difference_check: non-finite loss for " + p->name);
      }
      const double central = (lp - lm) / (2.0 * h);
      const double analytic = p->grad.values[c];
      const double err = std::abs(analytic - central) / std::max(1.0, std::abs(central));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace redress
