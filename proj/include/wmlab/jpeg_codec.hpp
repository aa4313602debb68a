#pragma once

#include <array>

#include "wmlab/image.hpp"

namespace wmlab::img {

// Baseline-sequential JPEG round trip: 8x8 DCT, Annex-K quantization tables
// scaled by the libjpeg quality law, 4:2:0 chroma subsampling. Entropy coding
// is lossless and therefore omitted; the pixel result equals a full
// encode/decode. Operates on the 8-bit denormalized image.
Image jpeg_roundtrip(const Image& image, int quality);

// quality-scaled table in row-major zigzag-free order; exposed for the
// differentiable training-time variant
std::array<int, 64> jpeg_quant_table(int quality, bool chroma);

}  // namespace wmlab::img
