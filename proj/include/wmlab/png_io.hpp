#pragma once

#include <string>

#include "wmlab/image.hpp"

namespace wmlab::img {

// 8-bit RGB PNG. Load normalizes samples with p/127.5 - 1; save inverts with
// round-half-away-from-zero. Grayscale and paletted files are expanded to RGB.
Image read_png(const std::string& path);
void write_png(const Image& image, const std::string& path);

}  // namespace wmlab::img
