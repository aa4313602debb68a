#include "wmlab/wm_model.hpp"

#include <cmath>
#include <stdexcept>

namespace wmlab::wm {

using ad::NodeSpec;

std::string arch_name(ArchId a) {
  switch (a) {
    case ArchId::CnnSmall: return "cnn-small";
    case ArchId::CnnDeep: return "cnn-deep";
  }
  throw std::logic_error("unknown ArchId");
}

ArchId arch_from_name(const std::string& s) {
  if (s == "cnn-small") return ArchId::CnnSmall;
  if (s == "cnn-deep") return ArchId::CnnDeep;
  throw std::invalid_argument("unknown architecture: " + s);
}

namespace {

// appends conv + batchnorm + relu, returns the relu node index
int conv_block(std::vector<NodeSpec>& g, int from, int in_ch, int out_ch,
               int stride = 1) {
  g.push_back(NodeSpec::conv2d(from, in_ch, out_ch, 3, stride));
  g.push_back(NodeSpec::batchnorm(static_cast<int>(g.size()) - 1, out_ch));
  g.push_back(NodeSpec::relu(static_cast<int>(g.size()) - 1));
  return static_cast<int>(g.size()) - 1;
}

// two conv blocks with a skip connection around them
int residual_block(std::vector<NodeSpec>& g, int from, int ch) {
  g.push_back(NodeSpec::conv2d(from, ch, ch, 3, 1));
  g.push_back(NodeSpec::batchnorm(static_cast<int>(g.size()) - 1, ch));
  g.push_back(NodeSpec::relu(static_cast<int>(g.size()) - 1));
  g.push_back(NodeSpec::conv2d(static_cast<int>(g.size()) - 1, ch, ch, 3, 1));
  g.push_back(NodeSpec::batchnorm(static_cast<int>(g.size()) - 1, ch));
  g.push_back(NodeSpec::residual(static_cast<int>(g.size()) - 1, from));
  g.push_back(NodeSpec::relu(static_cast<int>(g.size()) - 1));
  return static_cast<int>(g.size()) - 1;
}

ad::Network build_encoder(const ModelSpec& s) {
  const int hw = s.image_size, c = s.width;
  std::vector<NodeSpec> g;
  g.push_back(NodeSpec::input({3, hw, hw}));  // 0: image
  g.push_back(NodeSpec::input({s.n}));        // 1: watermark
  g.push_back(NodeSpec::tile_spatial(1, hw, hw));
  const int tiled = 2;

  const int pre_blocks = s.arch == ArchId::CnnDeep ? 2 : 2;
  const int post_blocks = s.arch == ArchId::CnnDeep ? 5 : 2;

  int cur = conv_block(g, 0, 3, c);
  for (int i = 1; i < pre_blocks; ++i) cur = conv_block(g, cur, c, c);
  g.push_back(NodeSpec::concat({cur, tiled, 0}));
  cur = static_cast<int>(g.size()) - 1;
  cur = conv_block(g, cur, c + s.n + 3, c);
  for (int i = 1; i < post_blocks; ++i) cur = conv_block(g, cur, c, c);
  g.push_back(NodeSpec::conv2d(cur, c, 3, 3, 1));
  g.push_back(NodeSpec::tanh(static_cast<int>(g.size()) - 1));
  g.push_back(NodeSpec::scale_shift(static_cast<int>(g.size()) - 1, s.scale, 0.0));
  return ad::Network(std::move(g));
}

ad::Network build_decoder(const ModelSpec& s) {
  const int hw = s.image_size, c = s.width;
  std::vector<NodeSpec> g;
  g.push_back(NodeSpec::input({3, hw, hw}));
  if (s.arch == ArchId::CnnSmall) {
    int cur = conv_block(g, 0, 3, c);
    cur = conv_block(g, cur, c, c, 2);
    cur = conv_block(g, cur, c, c);
    cur = conv_block(g, cur, c, c, 2);
    cur = conv_block(g, cur, c, c);
    cur = conv_block(g, cur, c, c);
    cur = conv_block(g, cur, c, c);
    g.push_back(NodeSpec::global_avg_pool(cur));
  } else {
    int cur = conv_block(g, 0, 3, c);
    cur = conv_block(g, cur, c, c, 2);
    cur = residual_block(g, cur, c);
    cur = conv_block(g, cur, c, c, 2);
    cur = residual_block(g, cur, c);
    g.push_back(NodeSpec::global_avg_pool(cur));
  }
  g.push_back(NodeSpec::linear(static_cast<int>(g.size()) - 1, c, s.n));
  return ad::Network(std::move(g));
}

}  // namespace

WatermarkModel make_model(const ModelSpec& spec, uint64_t init_seed) {
  if (spec.n < 1) throw std::invalid_argument("make_model: watermark length must be >= 1");
  if (spec.image_size < 8 || spec.image_size % 4 != 0)
    throw std::invalid_argument("make_model: image size must be a positive multiple of 4");
  if (spec.width < 1) throw std::invalid_argument("make_model: width must be >= 1");
  WatermarkModel m;
  m.spec = spec;
  m.encoder = build_encoder(spec);
  m.decoder = build_decoder(spec);
  Rng rng(init_seed);
  m.encoder.init_params(rng);
  m.decoder.init_params(rng);
  return m;
}

ad::Tensor image_to_tensor(const img::Image& image) {
  ad::Tensor t({1, image.channels(), image.height(), image.width()});
  for (int64_t i = 0; i < t.size(); ++i) t[i] = image.data()[static_cast<size_t>(i)];
  return t;
}

img::Image tensor_to_image(const ad::Tensor& t) {
  if (t.rank() != 4 || t.dim(0) != 1)
    throw std::invalid_argument("tensor_to_image: expected {1,C,H,W}");
  std::vector<double> data(t.vec());
  return img::Image::from_data(t.dim(1), t.dim(2), t.dim(3), std::move(data));
}

ad::Tensor bits_to_tensor(const std::vector<WatermarkBits>& ws) {
  if (ws.empty()) throw std::invalid_argument("bits_to_tensor: empty batch");
  const int n = ws[0].length();
  ad::Tensor t({static_cast<int>(ws.size()), n});
  for (size_t b = 0; b < ws.size(); ++b) {
    if (ws[b].length() != n) throw std::invalid_argument("bits_to_tensor: ragged batch");
    for (int j = 0; j < n; ++j) t[static_cast<int64_t>(b) * n + j] = ws[b].bit(j);
  }
  return t;
}

img::Image embed(const WatermarkModel& model, const img::Image& image,
                 const WatermarkBits& w) {
  if (w.length() != model.n())
    throw std::invalid_argument("embed: watermark length mismatch");
  if (image.height() != model.image_size() || image.width() != model.image_size() ||
      image.channels() != 3)
    throw std::invalid_argument("embed: image shape mismatch");
  ad::Network::Tape tape;
  const ad::Tensor x = image_to_tensor(image);
  const ad::Tensor wt = bits_to_tensor({w});
  const ad::Tensor& res = model.encoder.forward({x, wt}, tape);
  img::Image out = image;
  for (size_t i = 0; i < out.size(); ++i)
    out.raw()[i] = img::clamp_unit(out.raw()[i] + res[static_cast<int64_t>(i)]);
  return out;
}

std::vector<double> decode_soft(const WatermarkModel& model, const img::Image& image) {
  if (image.height() != model.image_size() || image.width() != model.image_size() ||
      image.channels() != 3)
    throw std::invalid_argument("decode: image shape mismatch");
  ad::Network::Tape tape;
  const ad::Tensor& logits = model.decoder.forward({image_to_tensor(image)}, tape);
  std::vector<double> soft(static_cast<size_t>(model.n()));
  for (int j = 0; j < model.n(); ++j)
    soft[static_cast<size_t>(j)] = 1.0 / (1.0 + std::exp(-logits[j]));
  return soft;
}

WatermarkBits threshold_soft(const std::vector<double>& soft) {
  std::vector<uint8_t> b(soft.size());
  for (size_t j = 0; j < soft.size(); ++j) b[j] = soft[j] >= 0.5 ? 1 : 0;
  return WatermarkBits(std::move(b));
}

WatermarkBits decode(const WatermarkModel& model, const img::Image& image) {
  return threshold_soft(decode_soft(model, image));
}

}  // namespace wmlab::wm
