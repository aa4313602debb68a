#pragma once

#include <string>
#include <vector>

#include "wmlab/bits.hpp"
#include "wmlab/graph.hpp"
#include "wmlab/image.hpp"

namespace wmlab::wm {

enum class ArchId : uint32_t { CnnSmall = 0, CnnDeep = 1 };

std::string arch_name(ArchId a);
ArchId arch_from_name(const std::string& s);

// Topology knobs for one encoder/decoder pair. `width` is the conv channel
// count; `scale` bounds the embedding residual (the encoder ends in
// tanh -> scale, so |residual| < scale).
struct ModelSpec {
  ArchId arch = ArchId::CnnSmall;
  int n = 16;
  int image_size = 32;
  int width = 12;
  double scale = 0.2;
};

// Paired encoder/decoder. The encoder maps (image, watermark) to a bounded
// residual; the decoder maps an image to n logits.
struct WatermarkModel {
  ModelSpec spec;
  ad::Network encoder;
  ad::Network decoder;

  int n() const { return spec.n; }
  int image_size() const { return spec.image_size; }
};

WatermarkModel make_model(const ModelSpec& spec, uint64_t init_seed);

// x_w = clamp(x + residual(x, w))
img::Image embed(const WatermarkModel& model, const img::Image& image,
                 const WatermarkBits& w);

// sigmoid of the decoder logits, one value in (0,1) per bit
std::vector<double> decode_soft(const WatermarkModel& model, const img::Image& image);

// elementwise threshold of decode_soft at 0.5; a tie decodes to 1
WatermarkBits decode(const WatermarkModel& model, const img::Image& image);
WatermarkBits threshold_soft(const std::vector<double>& soft);

// tensor bridging used by training and the attack
ad::Tensor image_to_tensor(const img::Image& image);
img::Image tensor_to_image(const ad::Tensor& t);  // clamps
ad::Tensor bits_to_tensor(const std::vector<WatermarkBits>& ws);

}  // namespace wmlab::wm
