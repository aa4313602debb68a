#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wmlab/image.hpp"

namespace wmlab::img {

enum class PostKind { Identity, Jpeg, GaussianNoise, GaussianBlur, BrightnessContrast };

std::string post_kind_name(PostKind k);
PostKind post_kind_from_name(const std::string& s);

// One post-processing operation with its parameters. Validation happens in
// validate(); apply() runs the op on a copy of the input.
struct PostProcessSpec {
  PostKind kind = PostKind::Identity;
  int quality = 90;        // JPEG Q
  double sigma = 0.0;      // noise or blur standard deviation
  int ksize = 5;           // blur kernel size, odd
  double brightness = 0.2; // B
  double contrast = 1.0;   // C > 0
  uint64_t seed = 0;       // noise randomness

  void validate() const;
  Image apply(const Image& in) const;
};

Image jpeg_compress(const Image& in, int quality);
Image gaussian_noise(const Image& in, double sigma, uint64_t seed);
Image gaussian_blur(const Image& in, int ksize, double sigma);
Image brightness_contrast(const Image& in, double brightness, double contrast);

// normalized 1-D Gaussian kernel; sigma -> 0 degenerates to a delta
std::vector<double> gaussian_kernel(int ksize, double sigma);

// index map for symmetric reflect padding
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace wmlab::img
