#include "redress/adam.hpp"

#include <cmath>

#include "redress/errors.hpp"

namespace redress {

void AdamOptimizer::step(const std::vector<ParamTensor*>& params) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (m_.empty()) {
    for (ParamTensor* p : params) {
      m_.emplace_back(p->value.values.size(), 0.0);
      v_.emplace_back(p->value.values.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw ContractError("adam: parameter list changed size");
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    ParamTensor* p = params[pi];
    auto& m = m_[pi];
    auto& v = v_[pi];
    if (m.size() != p->value.values.size()) throw ContractError("adam: parameter resized");
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = p->grad.values[i];
      if (!std::isfinite(g)) {
        throw NumericError("adam: non-finite gradient in " +
                           (p->name.empty() ? std::string("<unnamed>") : p->name));
      }
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      double x = p->value.values[i];
      x -= lr_ * weight_decay_ * x;  // decoupled decay
      x -= lr_ * mhat / (std::sqrt(vhat) + kEps);
      p->value.values[i] = x;
    }
  }
}

}  // namespace redress
