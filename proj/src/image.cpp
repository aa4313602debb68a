#include "wmlab/image.hpp"

#include <cmath>
#include <stdexcept>

namespace wmlab::img {

Image::Image(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels <= 0 || height <= 0 || width <= 0)
    throw std::invalid_argument("Image: dimensions must be positive");
  data_.assign(static_cast<size_t>(channels) * height * width, clamp_unit(fill));
}

Image Image::from_data(int channels, int height, int width, std::vector<double> data) {
  Image im(channels, height, width);
  if (data.size() != im.data_.size())
    throw std::invalid_argument("Image::from_data: size mismatch");
  im.data_ = std::move(data);
  im.clamp_();
  return im;
}

void Image::clamp_() {
  for (double& v : data_) v = clamp_unit(v);
}

uint8_t denormalize_u8(double v) {
  const double p = (clamp_unit(v) + 1.0) * 127.5;
  const double r = std::round(p);  // rounds half away from zero
  return static_cast<uint8_t>(r < 0.0 ? 0.0 : (r > 255.0 ? 255.0 : r));
}

}  // namespace wmlab::img
