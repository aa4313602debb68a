#pragma once

#include <cstdint>
#include <vector>

#include "wmlab/rng.hpp"

namespace wmlab::ad {

// Dense row-major tensor of doubles. Shapes used here are {N,C,H,W} for
// feature maps and {N,F} for vectors; parameters use whatever rank fits.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);

  static Tensor kaiming_uniform(std::vector<int> shape, int fan_in, Rng& rng);

  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  void fill(double v);
  void add_(const Tensor& o);   // elementwise +=
  void scale_(double s);

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

int64_t shape_size(const std::vector<int>& shape);

}  // namespace wmlab::ad
