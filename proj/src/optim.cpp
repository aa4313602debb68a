#include "wmlab/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace wmlab::ad {

Optimizer Optimizer::sgd(double lr) {
  Optimizer o;
  o.kind_ = OptKind::Sgd;
  o.lr_ = lr;
  return o;
}

Optimizer Optimizer::adam(double lr, double beta1, double beta2, double eps) {
  Optimizer o;
  o.kind_ = OptKind::Adam;
  o.lr_ = lr;
  o.beta1_ = beta1;
  o.beta2_ = beta2;
  o.eps_ = eps;
  return o;
}

void Optimizer::step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("Optimizer::step: parameter/gradient count mismatch");
  for (size_t i = 0; i < params.size(); ++i)
    if (!params[i].same_shape(grads[i]))
      throw std::invalid_argument("Optimizer::step: shape mismatch");

  if (kind_ == OptKind::Sgd) {
    for (size_t i = 0; i < params.size(); ++i)
      for (int64_t j = 0; j < params[i].size(); ++j)
        params[i][j] -= lr_ * grads[i][j];
    ++t_;
    return;
  }

  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.shape());
      v_.emplace_back(p.shape());
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    for (int64_t j = 0; j < params[i].size(); ++j) {
      const double gj = grads[i][j];
      m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * gj;
      v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * gj * gj;
      const double mhat = m_[i][j] / bc1;
      const double vhat = v_[i][j] / bc2;
      params[i][j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace wmlab::ad
