#pragma once

#include <functional>
#include <vector>

#include "redress/matrix.hpp"

namespace redress {

// Central-difference gradient checker. The caller populates each param's
// grad analytically (for the current values) before calling; the checker
// perturbs sampled coordinates of the values and compares.
//
// Returns max over sampled coordinates of
//   |analytic - central| / max(1, |central|).
//
// loss must be deterministic for fixed params and re-evaluable any number of
// times. Throws NumericError if a loss evaluation is non-finite.
double finite_difference_check(const std::function<double()>& loss,
                               const std::vector<ParamTensor*>& params, double h,
                               std::size_t max_coords_per_param = 24,
                               std::uint64_t sample_seed = 0);

}  // namespace redress
