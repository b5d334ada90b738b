#pragma once

#include <vector>

#include "redress/matrix.hpp"

namespace redress {

// Adam with decoupled weight decay. beta1=0.9, beta2=0.999, eps=1e-8.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr, double weight_decay) : lr_(lr), weight_decay_(weight_decay) {}

  // In-place parameter update from the populated grads; grads are left
  // untouched (the caller zeroes them). Throws NumericError naming the
  // parameter on a non-finite gradient.
  void step(const std::vector<ParamTensor*>& params);

  double lr() const { return lr_; }

 private:
  double lr_;
  double weight_decay_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace redress
