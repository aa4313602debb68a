#pragma once

#include <string>
#include <vector>

#include "wmlab/tensor.hpp"

namespace wmlab::ad {

enum class OpKind : uint32_t {
  Input = 0,
  Conv2d = 1,
  BatchNorm = 2,
  ReLU = 3,
  Sigmoid = 4,
  Tanh = 5,
  Linear = 6,
  GlobalAvgPool = 7,
  Concat = 8,
  Residual = 9,
  TileSpatial = 10,
  ScaleShift = 11,
};

std::string op_kind_name(OpKind k);

// Node of a feed-forward DAG. Nodes reference earlier nodes by index; the
// last node is the network output. Shapes below exclude the batch dimension.
struct NodeSpec {
  OpKind kind = OpKind::Input;
  std::vector<int> inputs;

  int in_ch = 0, out_ch = 0, ksize = 3, stride = 1, pad = 1;  // Conv2d
  int features_in = 0, features_out = 0;                      // Linear
  int channels = 0;                                           // BatchNorm
  int tile_h = 0, tile_w = 0;                                 // TileSpatial
  double a = 1.0, b = 0.0;                                    // ScaleShift
  std::vector<int> ishape;                                    // Input

  static NodeSpec input(std::vector<int> shape);
  static NodeSpec conv2d(int from, int in_ch, int out_ch, int ksize = 3, int stride = 1);
  static NodeSpec batchnorm(int from, int channels);
  static NodeSpec relu(int from);
  static NodeSpec sigmoid(int from);
  static NodeSpec tanh(int from);
  static NodeSpec linear(int from, int features_in, int features_out);
  static NodeSpec global_avg_pool(int from);
  static NodeSpec concat(std::vector<int> from);
  static NodeSpec residual(int x, int skip);
  static NodeSpec tile_spatial(int from, int h, int w);
  static NodeSpec scale_shift(int from, double a, double b);
};

// Trainable feed-forward network with reverse-mode gradients.
//
// Forward records activations on a Tape; backward consumes the tape and
// produces gradients for every parameter and for each graph input. BatchNorm
// uses batch statistics in training mode (updating running stats with
// momentum 0.1) and the running stats in inference mode.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<NodeSpec> nodes);

  struct Tape {
    std::vector<Tensor> out;               // per-node activations
    std::vector<std::vector<Tensor>> aux;  // per-node extras (BatchNorm)
    bool training = false;
  };

  struct Grads {
    std::vector<Tensor> params;  // aligned with params()
    std::vector<Tensor> inputs;  // aligned with graph inputs
  };

  void init_params(Rng& rng);  // Kaiming-uniform weights, zero biases

  const Tensor& forward(const std::vector<Tensor>& inputs, Tape& tape) const;
  const Tensor& forward_train(const std::vector<Tensor>& inputs, Tape& tape);

  Grads backward(const Tape& tape, const Tensor& d_output) const;

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  int num_inputs() const { return static_cast<int>(input_nodes_.size()); }
  const std::vector<int>& per_sample_output_shape() const { return shapes_.back(); }

  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  std::vector<Tensor>& buffers() { return buffers_; }
  const std::vector<Tensor>& buffers() const { return buffers_; }

  int64_t num_param_values() const;

 private:
  void infer_shapes();
  void allocate_params();
  const Tensor& run(const std::vector<Tensor>& inputs, Tape& tape, bool training);

  std::vector<NodeSpec> nodes_;
  std::vector<std::vector<int>> shapes_;  // per-sample shape per node
  std::vector<int> input_nodes_;
  std::vector<int> param_base_;   // first param slot per node (-1 if none)
  std::vector<int> buffer_base_;  // first buffer slot per node (-1 if none)
  std::vector<Tensor> params_;
  std::vector<Tensor> buffers_;
};

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

}  // namespace wmlab::ad
