#include "wmlab/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace wmlab::ad {

namespace {

int conv_out_len(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Gathers conv patches: col[(ci*k+ky)*k+kx][oy*ow+ox] = x[ci][oy*s+ky-p][ox*s+kx-p]
void im2col(const double* x, int c, int h, int w, int k, int stride, int pad,
            int oh, int ow, double* col) {
  const int pixels = oh * ow;
  for (int ci = 0; ci < c; ++ci)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        double* row = col + (static_cast<size_t>(ci) * k * k + ky * k + kx) * pixels;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          double* dst = row + static_cast<size_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            for (int ox = 0; ox < ow; ++ox) dst[ox] = 0.0;
            continue;
          }
          const double* src = x + (static_cast<size_t>(ci) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            dst[ox] = (ix < 0 || ix >= w) ? 0.0 : src[ix];
          }
        }
      }
}

void col2im_add(const double* col, int c, int h, int w, int k, int stride, int pad,
                int oh, int ow, double* x) {
  const int pixels = oh * ow;
  for (int ci = 0; ci < c; ++ci)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const double* row = col + (static_cast<size_t>(ci) * k * k + ky * k + kx) * pixels;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          double* dst = x + (static_cast<size_t>(ci) * h + iy) * w;
          const double* src = row + static_cast<size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
}

}  // namespace

std::string op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::Input: return "input";
    case OpKind::Conv2d: return "conv2d";
    case OpKind::BatchNorm: return "batchnorm";
    case OpKind::ReLU: return "relu";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::Linear: return "linear";
    case OpKind::GlobalAvgPool: return "gap";
    case OpKind::Concat: return "concat";
    case OpKind::Residual: return "residual";
    case OpKind::TileSpatial: return "tile";
    case OpKind::ScaleShift: return "scale-shift";
  }
  return "?";
}

NodeSpec NodeSpec::input(std::vector<int> shape) {
  NodeSpec n;
  n.kind = OpKind::Input;
  n.ishape = std::move(shape);
  return n;
}
NodeSpec NodeSpec::conv2d(int from, int in_ch, int out_ch, int ksize, int stride) {
  NodeSpec n;
  n.kind = OpKind::Conv2d;
  n.inputs = {from};
  n.in_ch = in_ch;
  n.out_ch = out_ch;
  n.ksize = ksize;
  n.stride = stride;
  n.pad = (ksize - 1) / 2;
  return n;
}
NodeSpec NodeSpec::batchnorm(int from, int channels) {
  NodeSpec n;
  n.kind = OpKind::BatchNorm;
  n.inputs = {from};
  n.channels = channels;
  return n;
}
NodeSpec NodeSpec::relu(int from) {
  NodeSpec n;
  n.kind = OpKind::ReLU;
  n.inputs = {from};
  return n;
}
NodeSpec NodeSpec::sigmoid(int from) {
  NodeSpec n;
  n.kind = OpKind::Sigmoid;
  n.inputs = {from};
  return n;
}
NodeSpec NodeSpec::tanh(int from) {
  NodeSpec n;
  n.kind = OpKind::Tanh;
  n.inputs = {from};
  return n;
}
NodeSpec NodeSpec::linear(int from, int features_in, int features_out) {
  NodeSpec n;
  n.kind = OpKind::Linear;
  n.inputs = {from};
  n.features_in = features_in;
  n.features_out = features_out;
  return n;
}
NodeSpec NodeSpec::global_avg_pool(int from) {
  NodeSpec n;
  n.kind = OpKind::GlobalAvgPool;
  n.inputs = {from};
  return n;
}
NodeSpec NodeSpec::concat(std::vector<int> from) {
  NodeSpec n;
  n.kind = OpKind::Concat;
  n.inputs = std::move(from);
  return n;
}
NodeSpec NodeSpec::residual(int x, int skip) {
  NodeSpec n;
  n.kind = OpKind::Residual;
  n.inputs = {x, skip};
  return n;
}
NodeSpec NodeSpec::tile_spatial(int from, int h, int w) {
  NodeSpec n;
  n.kind = OpKind::TileSpatial;
  n.inputs = {from};
  n.tile_h = h;
  n.tile_w = w;
  return n;
}
NodeSpec NodeSpec::scale_shift(int from, double a, double b) {
  NodeSpec n;
  n.kind = OpKind::ScaleShift;
  n.inputs = {from};
  n.a = a;
  n.b = b;
  return n;
}

Network::Network(std::vector<NodeSpec> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("Network: empty graph");
  for (size_t i = 0; i < nodes_.size(); ++i)
    for (int in : nodes_[i].inputs)
      if (in < 0 || static_cast<size_t>(in) >= i)
        throw std::invalid_argument("Network: node inputs must reference earlier nodes");
  infer_shapes();
  allocate_params();
}

void Network::infer_shapes() {
  shapes_.resize(nodes_.size());
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const NodeSpec& n = nodes_[i];
    auto in_shape = [&](int slot) -> const std::vector<int>& {
      return shapes_[static_cast<size_t>(n.inputs[static_cast<size_t>(slot)])];
    };
    switch (n.kind) {
      case OpKind::Input:
        if (n.ishape.empty()) throw std::invalid_argument("Input node needs a shape");
        input_nodes_.push_back(static_cast<int>(i));
        shapes_[i] = n.ishape;
        break;
      case OpKind::Conv2d: {
        const auto& s = in_shape(0);
        if (s.size() != 3 || s[0] != n.in_ch)
          throw std::invalid_argument("Conv2d: input channel mismatch");
        if (n.ksize < 1 || n.ksize % 2 == 0 || n.stride < 1)
          throw std::invalid_argument("Conv2d: bad kernel/stride");
        shapes_[i] = {n.out_ch, conv_out_len(s[1], n.ksize, n.stride, n.pad),
                      conv_out_len(s[2], n.ksize, n.stride, n.pad)};
        break;
      }
      case OpKind::BatchNorm: {
        const auto& s = in_shape(0);
        if (s.size() != 3 || s[0] != n.channels)
          throw std::invalid_argument("BatchNorm: channel mismatch");
        shapes_[i] = s;
        break;
      }
      case OpKind::ReLU:
      case OpKind::Sigmoid:
      case OpKind::Tanh:
      case OpKind::ScaleShift:
        shapes_[i] = in_shape(0);
        break;
      case OpKind::Linear: {
        const auto& s = in_shape(0);
        if (s.size() != 1 || s[0] != n.features_in)
          throw std::invalid_argument("Linear: feature mismatch");
        shapes_[i] = {n.features_out};
        break;
      }
      case OpKind::GlobalAvgPool: {
        const auto& s = in_shape(0);
        if (s.size() != 3) throw std::invalid_argument("GlobalAvgPool: expects a feature map");
        shapes_[i] = {s[0]};
        break;
      }
      case OpKind::Concat: {
        if (n.inputs.size() < 2) throw std::invalid_argument("Concat: needs >= 2 inputs");
        int ch = 0;
        const auto& first = in_shape(0);
        if (first.size() != 3) throw std::invalid_argument("Concat: expects feature maps");
        for (size_t j = 0; j < n.inputs.size(); ++j) {
          const auto& s = in_shape(static_cast<int>(j));
          if (s.size() != 3 || s[1] != first[1] || s[2] != first[2])
            throw std::invalid_argument("Concat: spatial size mismatch");
          ch += s[0];
        }
        shapes_[i] = {ch, first[1], first[2]};
        break;
      }
      case OpKind::Residual: {
        if (in_shape(0) != in_shape(1))
          throw std::invalid_argument("Residual: shape mismatch");
        shapes_[i] = in_shape(0);
        break;
      }
      case OpKind::TileSpatial: {
        const auto& s = in_shape(0);
        if (s.size() != 1) throw std::invalid_argument("TileSpatial: expects a vector");
        if (n.tile_h < 1 || n.tile_w < 1) throw std::invalid_argument("TileSpatial: bad size");
        shapes_[i] = {s[0], n.tile_h, n.tile_w};
        break;
      }
    }
  }
}

void Network::allocate_params() {
  param_base_.assign(nodes_.size(), -1);
  buffer_base_.assign(nodes_.size(), -1);
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const NodeSpec& n = nodes_[i];
    switch (n.kind) {
      case OpKind::Conv2d:
        param_base_[i] = static_cast<int>(params_.size());
        params_.emplace_back(std::vector<int>{n.out_ch, n.in_ch, n.ksize, n.ksize});
        params_.emplace_back(std::vector<int>{n.out_ch});
        break;
      case OpKind::Linear:
        param_base_[i] = static_cast<int>(params_.size());
        params_.emplace_back(std::vector<int>{n.features_out, n.features_in});
        params_.emplace_back(std::vector<int>{n.features_out});
        break;
      case OpKind::BatchNorm:
        param_base_[i] = static_cast<int>(params_.size());
        params_.emplace_back(std::vector<int>{n.channels});  // gamma
        params_.emplace_back(std::vector<int>{n.channels});  // beta
        buffer_base_[i] = static_cast<int>(buffers_.size());
        buffers_.emplace_back(std::vector<int>{n.channels});  // running mean
        buffers_.emplace_back(std::vector<int>{n.channels});  // running var
        break;
      default:
        break;
    }
  }
}

void Network::init_params(Rng& rng) {
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const NodeSpec& n = nodes_[i];
    const int p = param_base_[i];
    switch (n.kind) {
      case OpKind::Conv2d:
        params_[p] = Tensor::kaiming_uniform({n.out_ch, n.in_ch, n.ksize, n.ksize},
                                             n.in_ch * n.ksize * n.ksize, rng);
        params_[p + 1].fill(0.0);
        break;
      case OpKind::Linear:
        params_[p] = Tensor::kaiming_uniform({n.features_out, n.features_in},
                                             n.features_in, rng);
        params_[p + 1].fill(0.0);
        break;
      case OpKind::BatchNorm:
        params_[p].fill(1.0);
        params_[p + 1].fill(0.0);
        buffers_[buffer_base_[i]].fill(0.0);
        buffers_[buffer_base_[i] + 1].fill(1.0);
        break;
      default:
        break;
    }
  }
}

int64_t Network::num_param_values() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

const Tensor& Network::forward(const std::vector<Tensor>& inputs, Tape& tape) const {
  // inference never mutates; the const_cast is confined to the running-stat
  // update which training mode alone performs
  return const_cast<Network*>(this)->run(inputs, tape, false);
}

const Tensor& Network::forward_train(const std::vector<Tensor>& inputs, Tape& tape) {
  return run(inputs, tape, true);
}

const Tensor& Network::run(const std::vector<Tensor>& inputs, Tape& tape, bool training) {
  if (static_cast<int>(inputs.size()) != num_inputs())
    throw std::invalid_argument("Network: wrong number of inputs");
  int batch = -1;
  for (size_t gi = 0; gi < input_nodes_.size(); ++gi) {
    const auto& t = inputs[gi];
    const auto& want = shapes_[static_cast<size_t>(input_nodes_[gi])];
    if (t.rank() != static_cast<int>(want.size()) + 1)
      throw std::invalid_argument("Network: input rank mismatch");
    for (size_t d = 0; d < want.size(); ++d)
      if (t.dim(static_cast<int>(d) + 1) != want[d])
        throw std::invalid_argument("Network: input shape mismatch");
    if (batch < 0) batch = t.dim(0);
    if (t.dim(0) != batch) throw std::invalid_argument("Network: inconsistent batch size");
  }

  tape.training = training;
  tape.out.assign(nodes_.size(), Tensor());
  tape.aux.assign(nodes_.size(), {});

  int next_input = 0;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const NodeSpec& n = nodes_[i];
    auto in = [&](int slot) -> const Tensor& {
      return tape.out[static_cast<size_t>(n.inputs[static_cast<size_t>(slot)])];
    };
    std::vector<int> oshape = {batch};
    for (int d : shapes_[i]) oshape.push_back(d);

    switch (n.kind) {
      case OpKind::Input:
        tape.out[i] = inputs[static_cast<size_t>(next_input++)];
        break;
      case OpKind::Conv2d: {
        const Tensor& x = in(0);
        const int h = x.dim(2), w = x.dim(3);
        const int oh = conv_out_len(h, n.ksize, n.stride, n.pad);
        const int ow = conv_out_len(w, n.ksize, n.stride, n.pad);
        const int pixels = oh * ow;
        const int patch = n.in_ch * n.ksize * n.ksize;
        Tensor y(oshape);
        const Tensor& wgt = params_[param_base_[i]];
        const Tensor& bias = params_[param_base_[i] + 1];
        std::vector<double> col(static_cast<size_t>(patch) * pixels);
        const int64_t in_stride = static_cast<int64_t>(n.in_ch) * h * w;
        const int64_t out_stride = static_cast<int64_t>(n.out_ch) * pixels;
        for (int nb = 0; nb < batch; ++nb) {
          im2col(x.data() + nb * in_stride, n.in_ch, h, w, n.ksize, n.stride, n.pad,
                 oh, ow, col.data());
          double* out = y.data() + nb * out_stride;
          for (int co = 0; co < n.out_ch; ++co) {
            double* orow = out + static_cast<int64_t>(co) * pixels;
            const double bv = bias[co];
            for (int p = 0; p < pixels; ++p) orow[p] = bv;
            const double* wrow = wgt.data() + static_cast<int64_t>(co) * patch;
            for (int q = 0; q < patch; ++q) {
              const double wv = wrow[q];
              const double* crow = col.data() + static_cast<size_t>(q) * pixels;
              for (int p = 0; p < pixels; ++p) orow[p] += wv * crow[p];
            }
          }
        }
        tape.out[i] = std::move(y);
        break;
      }
      case OpKind::BatchNorm: {
        const Tensor& x = in(0);
        const int c = n.channels, h = x.dim(2), w = x.dim(3);
        const int64_t plane = static_cast<int64_t>(h) * w;
        const int64_t per_c = static_cast<int64_t>(batch) * plane;
        const Tensor& gamma = params_[param_base_[i]];
        const Tensor& beta = params_[param_base_[i] + 1];
        Tensor y(oshape);
        Tensor xhat(oshape);
        Tensor invstd({c});
        Tensor mean({c});
        if (training) {
          Tensor& rmean = buffers_[buffer_base_[i]];
          Tensor& rvar = buffers_[buffer_base_[i] + 1];
          for (int ci = 0; ci < c; ++ci) {
            double s = 0.0;
            for (int nb = 0; nb < batch; ++nb) {
              const double* p = x.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
              for (int64_t j = 0; j < plane; ++j) s += p[j];
            }
            const double m = s / static_cast<double>(per_c);
            double v = 0.0;
            for (int nb = 0; nb < batch; ++nb) {
              const double* p = x.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
              for (int64_t j = 0; j < plane; ++j) {
                const double d = p[j] - m;
                v += d * d;
              }
            }
            v /= static_cast<double>(per_c);
            mean[ci] = m;
            invstd[ci] = 1.0 / std::sqrt(v + kBnEps);
            rmean[ci] = (1.0 - kBnMomentum) * rmean[ci] + kBnMomentum * m;
            rvar[ci] = (1.0 - kBnMomentum) * rvar[ci] + kBnMomentum * v;
          }
        } else {
          const Tensor& rmean = buffers_[buffer_base_[i]];
          const Tensor& rvar = buffers_[buffer_base_[i] + 1];
          for (int ci = 0; ci < c; ++ci) {
            mean[ci] = rmean[ci];
            invstd[ci] = 1.0 / std::sqrt(rvar[ci] + kBnEps);
          }
        }
        for (int nb = 0; nb < batch; ++nb)
          for (int ci = 0; ci < c; ++ci) {
            const double* p = x.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
            double* ph = xhat.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
            double* py = y.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
            const double m = mean[ci], is = invstd[ci], g = gamma[ci], bt = beta[ci];
            for (int64_t j = 0; j < plane; ++j) {
              ph[j] = (p[j] - m) * is;
              py[j] = g * ph[j] + bt;
            }
          }
        tape.out[i] = std::move(y);
        tape.aux[i].push_back(std::move(xhat));
        tape.aux[i].push_back(std::move(invstd));
        break;
      }
      case OpKind::ReLU: {
        Tensor y = in(0);
        for (int64_t j = 0; j < y.size(); ++j)
          if (y[j] < 0.0) y[j] = 0.0;
        tape.out[i] = std::move(y);
        break;
      }
      case OpKind::Sigmoid: {
        Tensor y = in(0);
        for (int64_t j = 0; j < y.size(); ++j) y[j] = 1.0 / (1.0 + std::exp(-y[j]));
        tape.out[i] = std::move(y);
        break;
      }
      case OpKind::Tanh: {
        Tensor y = in(0);
        for (int64_t j = 0; j < y.size(); ++j) y[j] = std::tanh(y[j]);
        tape.out[i] = std::move(y);
        break;
      }
      case OpKind::Linear: {
        const Tensor& x = in(0);
        Tensor y(oshape);
        const Tensor& wgt = params_[param_base_[i]];
        const Tensor& bias = params_[param_base_[i] + 1];
        for (int nb = 0; nb < batch; ++nb) {
          const double* px = x.data() + static_cast<int64_t>(nb) * n.features_in;
          double* py = y.data() + static_cast<int64_t>(nb) * n.features_out;
          for (int fo = 0; fo < n.features_out; ++fo) {
            double s = bias[fo];
            const double* wrow = wgt.data() + static_cast<int64_t>(fo) * n.features_in;
            for (int fi = 0; fi < n.features_in; ++fi) s += wrow[fi] * px[fi];
            py[fo] = s;
          }
        }
        tape.out[i] = std::move(y);
        break;
      }
      case OpKind::GlobalAvgPool: {
        const Tensor& x = in(0);
        const int c = x.dim(1);
        const int64_t plane = static_cast<int64_t>(x.dim(2)) * x.dim(3);
        Tensor y(oshape);
        for (int nb = 0; nb < batch; ++nb)
          for (int ci = 0; ci < c; ++ci) {
            const double* p = x.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
            double s = 0.0;
            for (int64_t j = 0; j < plane; ++j) s += p[j];
            y[static_cast<int64_t>(nb) * c + ci] = s / static_cast<double>(plane);
          }
        tape.out[i] = std::move(y);
        break;
      }
      case OpKind::Concat: {
        Tensor y(oshape);
        const int h = shapes_[i][1], w = shapes_[i][2];
        const int64_t plane = static_cast<int64_t>(h) * w;
        const int total_c = shapes_[i][0];
        for (int nb = 0; nb < batch; ++nb) {
          int co = 0;
          for (size_t s = 0; s < n.inputs.size(); ++s) {
            const Tensor& x = in(static_cast<int>(s));
            const int c = x.dim(1);
            const double* src = x.data() + static_cast<int64_t>(nb) * c * plane;
            double* dst = y.data() + (static_cast<int64_t>(nb) * total_c + co) * plane;
            for (int64_t j = 0; j < static_cast<int64_t>(c) * plane; ++j) dst[j] = src[j];
            co += c;
          }
        }
        tape.out[i] = std::move(y);
        break;
      }
      case OpKind::Residual: {
        Tensor y = in(0);
        y.add_(in(1));
        tape.out[i] = std::move(y);
        break;
      }
      case OpKind::TileSpatial: {
        const Tensor& x = in(0);
        const int f = x.dim(1);
        Tensor y(oshape);
        const int64_t plane = static_cast<int64_t>(n.tile_h) * n.tile_w;
        for (int nb = 0; nb < batch; ++nb)
          for (int fi = 0; fi < f; ++fi) {
            const double v = x[static_cast<int64_t>(nb) * f + fi];
            double* dst = y.data() + (static_cast<int64_t>(nb) * f + fi) * plane;
            for (int64_t j = 0; j < plane; ++j) dst[j] = v;
          }
        tape.out[i] = std::move(y);
        break;
      }
      case OpKind::ScaleShift: {
        Tensor y = in(0);
        for (int64_t j = 0; j < y.size(); ++j) y[j] = n.a * y[j] + n.b;
        tape.out[i] = std::move(y);
        break;
      }
    }
  }
  return tape.out.back();
}

Network::Grads Network::backward(const Tape& tape, const Tensor& d_output) const {
  if (tape.out.size() != nodes_.size())
    throw std::invalid_argument("Network::backward: no forward tape");
  if (!d_output.same_shape(tape.out.back()))
    throw std::invalid_argument("Network::backward: output gradient shape mismatch");

  Grads g;
  g.params.reserve(params_.size());
  for (const auto& p : params_) g.params.emplace_back(p.shape());

  std::vector<Tensor> d(nodes_.size());
  for (size_t i = 0; i < nodes_.size(); ++i) d[i] = Tensor(tape.out[i].shape());
  d.back() = d_output;

  const int batch = tape.out.back().dim(0);

  for (int ii = static_cast<int>(nodes_.size()) - 1; ii >= 0; --ii) {
    const size_t i = static_cast<size_t>(ii);
    const NodeSpec& n = nodes_[i];
    const Tensor& dy = d[i];
    auto din = [&](int slot) -> Tensor& {
      return d[static_cast<size_t>(n.inputs[static_cast<size_t>(slot)])];
    };
    auto xin = [&](int slot) -> const Tensor& {
      return tape.out[static_cast<size_t>(n.inputs[static_cast<size_t>(slot)])];
    };

    switch (n.kind) {
      case OpKind::Input:
        break;
      case OpKind::Conv2d: {
        const Tensor& x = xin(0);
        const int h = x.dim(2), w = x.dim(3);
        const int oh = dy.dim(2), ow = dy.dim(3);
        const int pixels = oh * ow;
        const int patch = n.in_ch * n.ksize * n.ksize;
        const Tensor& wgt = params_[param_base_[i]];
        Tensor& dwgt = g.params[static_cast<size_t>(param_base_[i])];
        Tensor& dbias = g.params[static_cast<size_t>(param_base_[i]) + 1];
        Tensor& dx = din(0);
        std::vector<double> col(static_cast<size_t>(patch) * pixels);
        std::vector<double> dcol(static_cast<size_t>(patch) * pixels);
        const int64_t in_stride = static_cast<int64_t>(n.in_ch) * h * w;
        const int64_t out_stride = static_cast<int64_t>(n.out_ch) * pixels;
        for (int nb = 0; nb < batch; ++nb) {
          im2col(x.data() + nb * in_stride, n.in_ch, h, w, n.ksize, n.stride, n.pad,
                 oh, ow, col.data());
          const double* dout = dy.data() + nb * out_stride;
          for (int co = 0; co < n.out_ch; ++co) {
            const double* drow = dout + static_cast<int64_t>(co) * pixels;
            double s = 0.0;
            for (int p = 0; p < pixels; ++p) s += drow[p];
            dbias[co] += s;
            double* dwrow = dwgt.data() + static_cast<int64_t>(co) * patch;
            for (int q = 0; q < patch; ++q) {
              const double* crow = col.data() + static_cast<size_t>(q) * pixels;
              double acc = 0.0;
              for (int p = 0; p < pixels; ++p) acc += drow[p] * crow[p];
              dwrow[q] += acc;
            }
          }
          for (int q = 0; q < patch; ++q) {
            double* crow = dcol.data() + static_cast<size_t>(q) * pixels;
            for (int p = 0; p < pixels; ++p) crow[p] = 0.0;
          }
          for (int co = 0; co < n.out_ch; ++co) {
            const double* drow = dout + static_cast<int64_t>(co) * pixels;
            const double* wrow = wgt.data() + static_cast<int64_t>(co) * patch;
            for (int q = 0; q < patch; ++q) {
              const double wv = wrow[q];
              double* crow = dcol.data() + static_cast<size_t>(q) * pixels;
              for (int p = 0; p < pixels; ++p) crow[p] += wv * drow[p];
            }
          }
          col2im_add(dcol.data(), n.in_ch, h, w, n.ksize, n.stride, n.pad, oh, ow,
                     dx.data() + nb * in_stride);
        }
        break;
      }
      case OpKind::BatchNorm: {
        const int c = n.channels;
        const Tensor& xhat = tape.aux[i][0];
        const Tensor& invstd = tape.aux[i][1];
        const Tensor& gamma = params_[param_base_[i]];
        Tensor& dgamma = g.params[static_cast<size_t>(param_base_[i])];
        Tensor& dbeta = g.params[static_cast<size_t>(param_base_[i]) + 1];
        Tensor& dx = din(0);
        const int64_t plane = static_cast<int64_t>(dy.dim(2)) * dy.dim(3);
        const double count = static_cast<double>(batch) * static_cast<double>(plane);
        for (int ci = 0; ci < c; ++ci) {
          double sum_dy = 0.0, sum_dy_xhat = 0.0;
          for (int nb = 0; nb < batch; ++nb) {
            const double* pdy = dy.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
            const double* ph = xhat.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
            for (int64_t j = 0; j < plane; ++j) {
              sum_dy += pdy[j];
              sum_dy_xhat += pdy[j] * ph[j];
            }
          }
          dbeta[ci] += sum_dy;
          dgamma[ci] += sum_dy_xhat;
          const double gis = gamma[ci] * invstd[ci];
          if (tape.training) {
            for (int nb = 0; nb < batch; ++nb) {
              const double* pdy = dy.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
              const double* ph = xhat.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
              double* pdx = dx.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
              for (int64_t j = 0; j < plane; ++j)
                pdx[j] += gis * (pdy[j] - sum_dy / count - ph[j] * sum_dy_xhat / count);
            }
          } else {
            for (int nb = 0; nb < batch; ++nb) {
              const double* pdy = dy.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
              double* pdx = dx.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
              for (int64_t j = 0; j < plane; ++j) pdx[j] += gis * pdy[j];
            }
          }
        }
        break;
      }
      case OpKind::ReLU: {
        const Tensor& x = xin(0);
        Tensor& dx = din(0);
        for (int64_t j = 0; j < dy.size(); ++j)
          if (x[j] > 0.0) dx[j] += dy[j];
        break;
      }
      case OpKind::Sigmoid: {
        const Tensor& y = tape.out[i];
        Tensor& dx = din(0);
        for (int64_t j = 0; j < dy.size(); ++j) dx[j] += dy[j] * y[j] * (1.0 - y[j]);
        break;
      }
      case OpKind::Tanh: {
        const Tensor& y = tape.out[i];
        Tensor& dx = din(0);
        for (int64_t j = 0; j < dy.size(); ++j) dx[j] += dy[j] * (1.0 - y[j] * y[j]);
        break;
      }
      case OpKind::Linear: {
        const Tensor& x = xin(0);
        const Tensor& wgt = params_[param_base_[i]];
        Tensor& dwgt = g.params[static_cast<size_t>(param_base_[i])];
        Tensor& dbias = g.params[static_cast<size_t>(param_base_[i]) + 1];
        Tensor& dx = din(0);
        for (int nb = 0; nb < batch; ++nb) {
          const double* px = x.data() + static_cast<int64_t>(nb) * n.features_in;
          const double* pdy = dy.data() + static_cast<int64_t>(nb) * n.features_out;
          double* pdx = dx.data() + static_cast<int64_t>(nb) * n.features_in;
          for (int fo = 0; fo < n.features_out; ++fo) {
            const double dv = pdy[fo];
            dbias[fo] += dv;
            double* dwrow = dwgt.data() + static_cast<int64_t>(fo) * n.features_in;
            const double* wrow = wgt.data() + static_cast<int64_t>(fo) * n.features_in;
            for (int fi = 0; fi < n.features_in; ++fi) {
              dwrow[fi] += dv * px[fi];
              pdx[fi] += dv * wrow[fi];
            }
          }
        }
        break;
      }
      case OpKind::GlobalAvgPool: {
        const Tensor& x = xin(0);
        Tensor& dx = din(0);
        const int c = x.dim(1);
        const int64_t plane = static_cast<int64_t>(x.dim(2)) * x.dim(3);
        const double inv = 1.0 / static_cast<double>(plane);
        for (int nb = 0; nb < batch; ++nb)
          for (int ci = 0; ci < c; ++ci) {
            const double dv = dy[static_cast<int64_t>(nb) * c + ci] * inv;
            double* p = dx.data() + (static_cast<int64_t>(nb) * c + ci) * plane;
            for (int64_t j = 0; j < plane; ++j) p[j] += dv;
          }
        break;
      }
      case OpKind::Concat: {
        const int total_c = dy.dim(1);
        const int64_t plane = static_cast<int64_t>(dy.dim(2)) * dy.dim(3);
        for (int nb = 0; nb < batch; ++nb) {
          int co = 0;
          for (size_t s = 0; s < n.inputs.size(); ++s) {
            Tensor& dx = din(static_cast<int>(s));
            const int c = dx.dim(1);
            const double* src = dy.data() + (static_cast<int64_t>(nb) * total_c + co) * plane;
            double* dst = dx.data() + static_cast<int64_t>(nb) * c * plane;
            for (int64_t j = 0; j < static_cast<int64_t>(c) * plane; ++j) dst[j] += src[j];
            co += c;
          }
        }
        break;
      }
      case OpKind::Residual: {
        din(0).add_(dy);
        din(1).add_(dy);
        break;
      }
      case OpKind::TileSpatial: {
        Tensor& dx = din(0);
        const int f = dx.dim(1);
        const int64_t plane = static_cast<int64_t>(n.tile_h) * n.tile_w;
        for (int nb = 0; nb < batch; ++nb)
          for (int fi = 0; fi < f; ++fi) {
            const double* p = dy.data() + (static_cast<int64_t>(nb) * f + fi) * plane;
            double s = 0.0;
            for (int64_t j = 0; j < plane; ++j) s += p[j];
            dx[static_cast<int64_t>(nb) * f + fi] += s;
          }
        break;
      }
      case OpKind::ScaleShift: {
        Tensor& dx = din(0);
        for (int64_t j = 0; j < dy.size(); ++j) dx[j] += n.a * dy[j];
        break;
      }
    }
  }

  int next_input = 0;
  g.inputs.resize(input_nodes_.size());
  for (int node : input_nodes_) g.inputs[static_cast<size_t>(next_input++)] = d[static_cast<size_t>(node)];
  return g;
}

}  // namespace wmlab::ad
