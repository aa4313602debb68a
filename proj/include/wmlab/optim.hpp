#pragma once

#include <vector>

#include "wmlab/tensor.hpp"

namespace wmlab::ad {

enum class OptKind { Sgd, Adam };

// SGD: p -= lr * g. Adam: standard update with bias correction
// (beta1=0.9, beta2=0.999, eps=1e-8).
class Optimizer {
 public:
  static Optimizer sgd(double lr);
  static Optimizer adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                        double eps = 1e-8);

  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads);

  OptKind kind() const { return kind_; }
  long step_count() const { return t_; }

 private:
  OptKind kind_ = OptKind::Sgd;
  double lr_ = 0.01, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace wmlab::ad
