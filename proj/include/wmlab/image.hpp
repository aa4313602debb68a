#pragma once

#include <cstdint>
#include <vector>

namespace wmlab::img {

// Real-valued raster in [-1, 1], channel-major then row-major.
// Shape is fixed at construction; ops that can leave the range clamp.
class Image {
 public:
  Image() = default;
  Image(int channels, int height, int width, double fill = 0.0);

  static Image from_data(int channels, int height, int width,
                         std::vector<double> data);  // clamps into [-1,1]

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  size_t size() const { return data_.size(); }

  double& at(int c, int y, int x) {
    return data_[(static_cast<size_t>(c) * height_ + y) * width_ + x];
  }
  double at(int c, int y, int x) const {
    return data_[(static_cast<size_t>(c) * height_ + y) * width_ + x];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& raw() { return data_; }  // caller keeps the range invariant

  bool same_shape(const Image& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

  void clamp_();

 private:
  int channels_ = 0, height_ = 0, width_ = 0;
  std::vector<double> data_;
};

constexpr double kClampLo = -1.0;
constexpr double kClampHi = 1.0;

inline double clamp_unit(double v) {
  return v < kClampLo ? kClampLo : (v > kClampHi ? kClampHi : v);
}

// [0,255] sample -> [-1,1]
inline double normalize_u8(double p) { return p / 127.5 - 1.0; }

// [-1,1] -> 8-bit sample with round-half-away-from-zero
uint8_t denormalize_u8(double v);

}  // namespace wmlab::img
