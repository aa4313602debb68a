#include "wmlab/postprocess.hpp"

#include <cmath>
#include <stdexcept>

#include "wmlab/jpeg_codec.hpp"
#include "wmlab/rng.hpp"

namespace wmlab::img {

std::string post_kind_name(PostKind k) {
  switch (k) {
    case PostKind::Identity: return "identity";
    case PostKind::Jpeg: return "jpeg";
    case PostKind::GaussianNoise: return "gaussian-noise";
    case PostKind::GaussianBlur: return "gaussian-blur";
    case PostKind::BrightnessContrast: return "brightness-contrast";
  }
  throw std::logic_error("unknown PostKind");
}

PostKind post_kind_from_name(const std::string& s) {
  if (s == "identity") return PostKind::Identity;
  if (s == "jpeg") return PostKind::Jpeg;
  if (s == "gaussian-noise") return PostKind::GaussianNoise;
  if (s == "gaussian-blur") return PostKind::GaussianBlur;
  if (s == "brightness-contrast") return PostKind::BrightnessContrast;
  throw std::invalid_argument("unknown post-processing kind: " + s);
}

void PostProcessSpec::validate() const {
  if (kind == PostKind::Jpeg && (quality < 1 || quality > 100))
    throw std::invalid_argument("post-process: JPEG quality must be in [1,100]");
  if (sigma < 0.0) throw std::invalid_argument("post-process: sigma must be >= 0");
  if (ksize < 1 || ksize % 2 == 0)
    throw std::invalid_argument("post-process: kernel size must be odd and >= 1");
  if (contrast <= 0.0) throw std::invalid_argument("post-process: contrast must be > 0");
}

Image PostProcessSpec::apply(const Image& in) const {
  validate();
  switch (kind) {
    case PostKind::Identity: return in;
    case PostKind::Jpeg: return jpeg_compress(in, quality);
    case PostKind::GaussianNoise: return gaussian_noise(in, sigma, seed);
    case PostKind::GaussianBlur: return gaussian_blur(in, ksize, sigma);
    case PostKind::BrightnessContrast: return brightness_contrast(in, brightness, contrast);
  }
  throw std::logic_error("unknown PostKind");
}

Image jpeg_compress(const Image& in, int quality) {
  if (quality < 1 || quality > 100)
    throw std::invalid_argument("jpeg_compress: quality must be in [1,100]");
  return jpeg_roundtrip(in, quality);
}

Image gaussian_noise(const Image& in, double sigma, uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("gaussian_noise: sigma must be >= 0");
  Image out = in;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (double& v : out.raw()) v = clamp_unit(v + rng.normal(0.0, sigma));
  return out;
}

std::vector<double> gaussian_kernel(int ksize, double sigma) {
  if (ksize < 1 || ksize % 2 == 0)
    throw std::invalid_argument("gaussian_kernel: size must be odd and >= 1");
  std::vector<double> k(ksize, 0.0);
  const int c = ksize / 2;
  if (sigma <= 1e-12) {
    k[c] = 1.0;
    return k;
  }
  double sum = 0.0;
  for (int i = 0; i < ksize; ++i) {
    const double d = i - c;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

Image gaussian_blur(const Image& in, int ksize, double sigma) {
  const auto k = gaussian_kernel(ksize, sigma);  // validates ksize
  if (sigma < 0.0) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
  const int c = ksize / 2;
  const int h = in.height(), w = in.width();

  Image tmp(in.channels(), h, w);
  for (int ch = 0; ch < in.channels(); ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int i = 0; i < ksize; ++i) s += k[i] * in.at(ch, y, reflect_index(x + i - c, w));
        tmp.at(ch, y, x) = s;
      }
  Image out(in.channels(), h, w);
  for (int ch = 0; ch < in.channels(); ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int i = 0; i < ksize; ++i) s += k[i] * tmp.at(ch, reflect_index(y + i - c, h), x);
        out.at(ch, y, x) = clamp_unit(s);
      }
  return out;
}

Image brightness_contrast(const Image& in, double brightness, double contrast) {
  if (contrast <= 0.0)
    throw std::invalid_argument("brightness_contrast: contrast must be > 0");
  Image out = in;
  for (double& v : out.raw()) v = clamp_unit(contrast * v + brightness);
  return out;
}

}  // namespace wmlab::img
