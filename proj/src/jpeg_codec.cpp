#include "wmlab/jpeg_codec.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wmlab::img {

namespace {

constexpr int kLumaBase[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

constexpr int kChromaBase[64] = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

struct CosTable {
  double c[8][8];  // c[u][x] = C(u) * cos((2x+1) u pi / 16) / 2
  CosTable() {
    for (int u = 0; u < 8; ++u) {
      const double cu = (u == 0) ? 1.0 / std::sqrt(2.0) : 1.0;
      for (int x = 0; x < 8; ++x)
        c[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * M_PI / 16.0);
    }
  }
};
const CosTable kCos;

void fdct8x8(const double in[64], double out[64]) {
  double tmp[64];
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int x = 0; x < 8; ++x) s += in[y * 8 + x] * kCos.c[u][x];
      tmp[y * 8 + u] = s;
    }
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y) s += tmp[y * 8 + u] * kCos.c[v][y];
      out[v * 8 + u] = s;
    }
}

void idct8x8(const double in[64], double out[64]) {
  double tmp[64];
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += in[v * 8 + u] * kCos.c[u][x];
      tmp[v * 8 + x] = s;
    }
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      double s = 0.0;
      for (int v = 0; v < 8; ++v) s += tmp[v * 8 + x] * kCos.c[v][y];
      out[y * 8 + x] = s;
    }
}

// plane stored row-major with edge-replicated padding to a block multiple
struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

Plane make_plane(int h, int w, int mult) {
  Plane p;
  p.h = (h + mult - 1) / mult * mult;
  p.w = (w + mult - 1) / mult * mult;
  p.v.assign(static_cast<size_t>(p.h) * p.w, 0.0);
  return p;
}

void quantize_plane(Plane& p, const std::array<int, 64>& qt) {
  double block[64], coef[64];
  for (int by = 0; by < p.h; by += 8)
    for (int bx = 0; bx < p.w; bx += 8) {
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) block[y * 8 + x] = p.at(by + y, bx + x) - 128.0;
      fdct8x8(block, coef);
      for (int i = 0; i < 64; ++i) coef[i] = std::round(coef[i] / qt[i]) * qt[i];
      idct8x8(coef, block);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) p.at(by + y, bx + x) = block[y * 8 + x] + 128.0;
    }
}

}  // namespace

std::array<int, 64> jpeg_quant_table(int quality, bool chroma) {
  if (quality < 1 || quality > 100)
    throw std::invalid_argument("jpeg quality must be in [1,100]");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  const int* base = chroma ? kChromaBase : kLumaBase;
  std::array<int, 64> out;
  for (int i = 0; i < 64; ++i) {
    int q = (base[i] * scale + 50) / 100;
    out[i] = q < 1 ? 1 : (q > 255 ? 255 : q);
  }
  return out;
}

Image jpeg_roundtrip(const Image& image, int quality) {
  if (image.channels() != 3)
    throw std::invalid_argument("jpeg_roundtrip: expected 3 channels");
  const auto qt_l = jpeg_quant_table(quality, false);
  const auto qt_c = jpeg_quant_table(quality, true);

  const int h = image.height(), w = image.width();
  Plane Y = make_plane(h, w, 16);
  Plane Cb = make_plane((h + 1) / 2, (w + 1) / 2, 8);
  Plane Cr = make_plane((h + 1) / 2, (w + 1) / 2, 8);

  // full-resolution chroma buffers before subsampling
  Plane cb_full = make_plane(h, w, 16);
  Plane cr_full = make_plane(h, w, 16);

  for (int y = 0; y < Y.h; ++y)
    for (int x = 0; x < Y.w; ++x) {
      const int sy = y < h ? y : h - 1;
      const int sx = x < w ? x : w - 1;
      const double r = denormalize_u8(image.at(0, sy, sx));
      const double g = denormalize_u8(image.at(1, sy, sx));
      const double b = denormalize_u8(image.at(2, sy, sx));
      Y.at(y, x) = 0.299 * r + 0.587 * g + 0.114 * b;
      cb_full.at(y, x) = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
      cr_full.at(y, x) = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
    }

  // 4:2:0 box subsampling
  for (int y = 0; y < Cb.h; ++y)
    for (int x = 0; x < Cb.w; ++x) {
      const int yy = 2 * y, xx = 2 * x;
      Cb.at(y, x) = 0.25 * (cb_full.at(yy, xx) + cb_full.at(yy, xx + 1) +
                            cb_full.at(yy + 1, xx) + cb_full.at(yy + 1, xx + 1));
      Cr.at(y, x) = 0.25 * (cr_full.at(yy, xx) + cr_full.at(yy, xx + 1) +
                            cr_full.at(yy + 1, xx) + cr_full.at(yy + 1, xx + 1));
    }

  quantize_plane(Y, qt_l);
  quantize_plane(Cb, qt_c);
  quantize_plane(Cr, qt_c);

  Image out(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double yy = Y.at(y, x);
      const double cb = Cb.at(y / 2, x / 2) - 128.0;  // replication upsampling
      const double cr = Cr.at(y / 2, x / 2) - 128.0;
      double r = yy + 1.402 * cr;
      double g = yy - 0.344136 * cb - 0.714136 * cr;
      double b = yy + 1.772 * cb;
      r = std::round(r < 0 ? 0 : (r > 255 ? 255 : r));
      g = std::round(g < 0 ? 0 : (g > 255 ? 255 : g));
      b = std::round(b < 0 ? 0 : (b > 255 ? 255 : b));
      out.at(0, y, x) = normalize_u8(r);
      out.at(1, y, x) = normalize_u8(g);
      out.at(2, y, x) = normalize_u8(b);
    }
  return out;
}

}  // namespace wmlab::img
