#include "wmlab/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace wmlab::ad {

int64_t shape_size(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
  data_.assign(static_cast<size_t>(shape_size(shape_)), fill);
}

Tensor Tensor::kaiming_uniform(std::vector<int> shape, int fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : t.data_) v = rng.uniform(-bound, bound);
  return t;
}

void Tensor::fill(double v) {
  for (auto& x : data_) x = v;
}

void Tensor::add_(const Tensor& o) {
  if (!same_shape(o)) throw std::invalid_argument("Tensor::add_: shape mismatch");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
}

void Tensor::scale_(double s) {
  for (auto& x : data_) x *= s;
}

}  // namespace wmlab::ad
