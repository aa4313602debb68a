#pragma once

#include "wmlab/image.hpp"

namespace wmlab::img {

// Perturbation metrics between two same-shape images. Distances are divided
// by 2 so they read as fractions of the full 8-bit pixel range.
double metric_linf(const Image& a, const Image& b);
double metric_l2(const Image& a, const Image& b);

// Mean SSIM on the channel-mean grayscale image: 11x11 Gaussian window
// (sigma 1.5), K1=0.02, K2=0.03, dynamic range 2, valid windows only.
double metric_ssim(const Image& a, const Image& b);

}  // namespace wmlab::img
