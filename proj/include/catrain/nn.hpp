#pragma once
// The classifier: an ordered layer stack over flat row-major batches.
// One forward trace serves both backward passes: parameter gradients for
// training steps and input gradients for attack crafting. Networks are
// immutable values; sgd_step returns a new network.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "catrain/rng.hpp"
#include "catrain/tensor.hpp"

namespace catrain {

struct DenseSpec {
  std::size_t in_dim, out_dim;
};
struct ReluSpec {};
struct Conv2dSpec {
  std::size_t in_ch, out_ch, kernel, stride;
};
struct MaxPool2dSpec {
  std::size_t kernel;
};
struct FlattenSpec {};

using LayerSpec = std::variant<DenseSpec, ReluSpec, Conv2dSpec, MaxPool2dSpec, FlattenSpec>;

inline std::string spec_str(const LayerSpec& s) {
  if (auto* d = std::get_if<DenseSpec>(&s)) {
    return "dense(" + std::to_string(d->in_dim) + "," + std::to_string(d->out_dim) + ")";
  }
  if (std::get_if<ReluSpec>(&s)) return "relu";
  if (auto* c = std::get_if<Conv2dSpec>(&s)) {
    return "conv2d(" + std::to_string(c->in_ch) + "," + std::to_string(c->out_ch) + ",k" +
           std::to_string(c->kernel) + ",s" + std::to_string(c->stride) + ")";
  }
  if (auto* p = std::get_if<MaxPool2dSpec>(&s)) {
    return "maxpool2d(" + std::to_string(p->kernel) + ")";
  }
  return "flatten";
}

struct LayerParams {
  Tensor weight;
  Tensor bias;
  bool has_params() const { return !weight.data.empty(); }
};

struct Network {
  std::vector<LayerSpec> layers;
  std::vector<LayerParams> params;  // aligned with layers; empty when parameterless
  std::uint64_t rng_seed = 0;
};

struct LossReport {
  double mean_loss = 0.0;
  Tensor per_example_loss;  // [B]
  Tensor log_probs;         // [B x K]
};

struct ParamGrad {
  Tensor weight;
  Tensor bias;
};

struct Gradients {
  std::map<std::size_t, ParamGrad> by_parameter;  // layer index -> grads
  std::optional<Tensor> by_input;                 // matches the input batch shape
};

namespace detail {

// Statically checkable chaining: flat width through dense chains, channel
// count through conv/pool chains. Spatial sizes are only known at forward
// time, so flatten->dense joints are validated there.
inline void validate_chain(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("init_network: empty layer list");
  std::optional<std::size_t> width;
  std::optional<std::size_t> channels;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& s = specs[i];
    auto fail = [&](const std::string& why) {
      std::string prev = i == 0 ? std::string("input") : spec_str(specs[i - 1]);
      throw std::invalid_argument("init_network: layer " + std::to_string(i) + " (" +
                                  spec_str(s) + ") does not chain with " + prev + ": " + why);
    };
    if (auto* d = std::get_if<DenseSpec>(&s)) {
      if (d->in_dim == 0 || d->out_dim == 0) fail("zero dimension");
      if (width && *width != d->in_dim) {
        fail("expected input width " + std::to_string(*width) + ", spec says " +
             std::to_string(d->in_dim));
      }
      width = d->out_dim;
      channels.reset();
    } else if (std::get_if<ReluSpec>(&s)) {
      // shape preserved
    } else if (auto* c = std::get_if<Conv2dSpec>(&s)) {
      if (c->in_ch == 0 || c->out_ch == 0 || c->kernel == 0 || c->stride == 0) {
        fail("zero field");
      }
      if (channels && *channels != c->in_ch) {
        fail("expected " + std::to_string(*channels) + " input channels, spec says " +
             std::to_string(c->in_ch));
      }
      channels = c->out_ch;
      width.reset();
    } else if (std::get_if<MaxPool2dSpec>(&s)) {
      width.reset();  // channels preserved, spatial size changes
    } else {
      channels.reset();  // flatten
    }
  }
}

inline Tensor colsum(const Tensor& m) {
  Tensor out({m.cols()});
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.data[j] += m(i, j);
  return out;
}

struct Shape2d {
  std::size_t ch, h, w;
};

// Resolve the [ch][h][w] interpretation of a flat row of width `d` entering a
// conv/pool layer. Square images only.
inline Shape2d resolve_2d(std::size_t d, std::size_t in_ch, const std::string& who) {
  if (in_ch == 0 || d % in_ch != 0) {
    throw std::invalid_argument(who + ": input width " + std::to_string(d) +
                                " is not divisible by " + std::to_string(in_ch) + " channels");
  }
  std::size_t hw = d / in_ch;
  std::size_t side = static_cast<std::size_t>(std::lround(std::sqrt(double(hw))));
  if (side * side != hw) {
    throw std::invalid_argument(who + ": per-channel width " + std::to_string(hw) +
                                " is not a square image");
  }
  return {in_ch, side, side};
}

// im2col: one row per output position, columns ordered [c][kh][kw].
inline Tensor im2col(const Tensor& x, Shape2d in, std::size_t k, std::size_t s,
                     std::size_t oh, std::size_t ow) {
  const std::size_t b = x.rows();
  const std::size_t ckk = in.ch * k * k;
  Tensor p({b * oh * ow, ckk});
  for (std::size_t n = 0; n < b; ++n) {
    const double* row = &x.data[n * x.cols()];
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        double* dst = &p.data[((n * oh + y) * ow + xx) * ckk];
        for (std::size_t c = 0; c < in.ch; ++c) {
          const double* chan = row + c * in.h * in.w;
          for (std::size_t kh = 0; kh < k; ++kh) {
            const double* src = chan + (y * s + kh) * in.w + xx * s;
            std::memcpy(dst, src, k * sizeof(double));
            dst += k;
          }
        }
      }
    }
  }
  return p;
}

// Channel count entering layer i (1 when no conv precedes it).
inline std::size_t channels_before(const std::vector<LayerSpec>& layers, std::size_t i) {
  for (std::size_t j = i; j-- > 0;) {
    if (auto* pc = std::get_if<Conv2dSpec>(&layers[j])) return pc->out_ch;
  }
  return 1;
}

inline void col2im_add(const Tensor& p, Shape2d in, std::size_t k, std::size_t s,
                       std::size_t oh, std::size_t ow, Tensor& dx) {
  const std::size_t b = dx.rows();
  const std::size_t ckk = in.ch * k * k;
  for (std::size_t n = 0; n < b; ++n) {
    double* row = &dx.data[n * dx.cols()];
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        const double* src = &p.data[((n * oh + y) * ow + xx) * ckk];
        for (std::size_t c = 0; c < in.ch; ++c) {
          double* chan = row + c * in.h * in.w;
          for (std::size_t kh = 0; kh < k; ++kh) {
            double* dst = chan + (y * s + kh) * in.w + xx * s;
            for (std::size_t kw = 0; kw < k; ++kw) dst[kw] += src[kw];
            src += k;
          }
        }
      }
    }
  }
}

}  // namespace detail

// Fan-in-scaled uniform weights, zero biases; deterministic in (specs, seed).
inline Network init_network(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  detail::validate_chain(specs);
  Network net;
  net.layers = specs;
  net.rng_seed = seed;
  net.params.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto st = rng::stream(seed, "init", i);
    if (auto* d = std::get_if<DenseSpec>(&specs[i])) {
      double limit = std::sqrt(6.0 / static_cast<double>(d->in_dim));
      Tensor w({d->out_dim, d->in_dim});
      for (auto& v : w.data) v = st.uniform(-limit, limit);
      net.params[i] = {std::move(w), Tensor({d->out_dim})};
    } else if (auto* c = std::get_if<Conv2dSpec>(&specs[i])) {
      std::size_t fan_in = c->in_ch * c->kernel * c->kernel;
      double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
      Tensor w({c->out_ch, fan_in});
      for (auto& v : w.data) v = st.uniform(-limit, limit);
      net.params[i] = {std::move(w), Tensor({c->out_ch})};
    }
  }
  return net;
}

// Activations for every layer boundary: trace[0] = x, trace[i+1] = layer i out.
inline std::vector<Tensor> forward_trace(const Network& net, const Tensor& x) {
  detail::require_matrix(x, "forward");
  std::vector<Tensor> trace;
  trace.reserve(net.layers.size() + 1);
  trace.push_back(x);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Tensor& in = trace.back();
    const LayerSpec& s = net.layers[i];
    if (auto* d = std::get_if<DenseSpec>(&s)) {
      if (in.cols() != d->in_dim) {
        throw std::invalid_argument("forward: layer " + std::to_string(i) + " (" + spec_str(s) +
                                    ") expects width " + std::to_string(d->in_dim) + ", got " +
                                    in.shape_str());
      }
      Tensor out = matmul_nt(in, net.params[i].weight);
      const Tensor& bias = net.params[i].bias;
      for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t j = 0; j < out.cols(); ++j) out(r, j) += bias.data[j];
      trace.push_back(std::move(out));
    } else if (std::get_if<ReluSpec>(&s)) {
      trace.push_back(relu(in));
    } else if (auto* c = std::get_if<Conv2dSpec>(&s)) {
      auto shape = detail::resolve_2d(in.cols(), c->in_ch, "forward: " + spec_str(s));
      if (shape.h < c->kernel) {
        throw std::invalid_argument("forward: " + spec_str(s) + ": image side " +
                                    std::to_string(shape.h) + " smaller than kernel");
      }
      std::size_t oh = (shape.h - c->kernel) / c->stride + 1;
      std::size_t ow = (shape.w - c->kernel) / c->stride + 1;
      Tensor p = detail::im2col(in, shape, c->kernel, c->stride, oh, ow);
      Tensor cols = matmul_nt(p, net.params[i].weight);  // [B*oh*ow x out_ch]
      Tensor out({in.rows(), c->out_ch * oh * ow});
      for (std::size_t n = 0; n < in.rows(); ++n) {
        for (std::size_t pos = 0; pos < oh * ow; ++pos) {
          for (std::size_t oc = 0; oc < c->out_ch; ++oc) {
            out.data[n * out.cols() + oc * oh * ow + pos] =
                cols(n * oh * ow + pos, oc) + net.params[i].bias.data[oc];
          }
        }
      }
      trace.push_back(std::move(out));
    } else if (auto* pl = std::get_if<MaxPool2dSpec>(&s)) {
      std::size_t ch = detail::channels_before(net.layers, i);
      auto shape = detail::resolve_2d(in.cols(), ch, "forward: " + spec_str(s));
      std::size_t k = pl->kernel;
      std::size_t oh = shape.h / k, ow = shape.w / k;
      if (oh == 0 || ow == 0) {
        throw std::invalid_argument("forward: " + spec_str(s) + ": image side " +
                                    std::to_string(shape.h) + " smaller than pool kernel");
      }
      Tensor out({in.rows(), ch * oh * ow});
      for (std::size_t n = 0; n < in.rows(); ++n) {
        const double* row = &in.data[n * in.cols()];
        for (std::size_t c = 0; c < ch; ++c) {
          const double* chan = row + c * shape.h * shape.w;
          for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t xx = 0; xx < ow; ++xx) {
              double best = chan[(y * k) * shape.w + xx * k];
              for (std::size_t kh = 0; kh < k; ++kh)
                for (std::size_t kw = 0; kw < k; ++kw)
                  best = std::max(best, chan[(y * k + kh) * shape.w + xx * k + kw]);
              out.data[n * out.cols() + c * oh * ow + y * ow + xx] = best;
            }
          }
        }
      }
      trace.push_back(std::move(out));
    } else {  // flatten: shape bookkeeping only, data is already flat
      trace.push_back(in);
    }
  }
  return trace;
}

inline Tensor forward(const Network& net, const Tensor& x) {
  return forward_trace(net, x).back();
}

inline std::size_t output_dim(const Network& net) {
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    if (auto* d = std::get_if<DenseSpec>(&net.layers[i])) return d->out_dim;
  }
  throw std::invalid_argument("output_dim: network has no dense layer");
}

namespace detail {

inline void check_labels(const std::vector<int>& y, std::size_t b, std::size_t k) {
  if (y.size() != b) {
    throw std::invalid_argument("labels: got " + std::to_string(y.size()) + " labels for " +
                                std::to_string(b) + " examples");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= k) {
      throw std::invalid_argument("labels: label " + std::to_string(y[i]) +
                                  " out of range [0," + std::to_string(k) + ") at index " +
                                  std::to_string(i));
    }
  }
}

// Backward through one layer. `need_params` controls whether dW/db are built.
inline Tensor layer_backward(const LayerSpec& s, const LayerParams& p, const Tensor& in,
                             const Tensor& out, const Tensor& dout, bool need_params,
                             ParamGrad* pg, std::size_t in_channels) {
  if (auto* d = std::get_if<DenseSpec>(&s)) {
    (void)d;
    if (need_params) {
      pg->weight = matmul_tn(dout, in);  // [out x in]
      pg->bias = colsum(dout);
    }
    return matmul(dout, p.weight);  // [B x in]
  }
  if (std::get_if<ReluSpec>(&s)) {
    Tensor dx = dout;
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (in.data[i] <= 0.0) dx.data[i] = 0.0;
    return dx;
  }
  if (auto* c = std::get_if<Conv2dSpec>(&s)) {
    auto shape = resolve_2d(in.cols(), c->in_ch, "backward: " + spec_str(s));
    std::size_t oh = (shape.h - c->kernel) / c->stride + 1;
    std::size_t ow = (shape.w - c->kernel) / c->stride + 1;
    const std::size_t b = in.rows();
    // gather dout rows [oc][pos] into [B*pos x oc] column layout
    Tensor dcols({b * oh * ow, c->out_ch});
    for (std::size_t n = 0; n < b; ++n)
      for (std::size_t oc = 0; oc < c->out_ch; ++oc)
        for (std::size_t pos = 0; pos < oh * ow; ++pos)
          dcols(n * oh * ow + pos, oc) = dout.data[n * dout.cols() + oc * oh * ow + pos];
    Tensor patches = im2col(in, shape, c->kernel, c->stride, oh, ow);
    if (need_params) {
      pg->weight = matmul_tn(dcols, patches);  // [oc x ckk]
      pg->bias = colsum(dcols);
    }
    Tensor dpatches = matmul(dcols, p.weight);  // [B*pos x ckk]
    Tensor dx({b, in.cols()});
    col2im_add(dpatches, shape, c->kernel, c->stride, oh, ow, dx);
    return dx;
  }
  if (auto* pl = std::get_if<MaxPool2dSpec>(&s)) {
    auto shape = resolve_2d(in.cols(), in_channels, "backward: " + spec_str(s));
    std::size_t k = pl->kernel;
    std::size_t oh = shape.h / k, ow = shape.w / k;
    Tensor dx({in.rows(), in.cols()});
    for (std::size_t n = 0; n < in.rows(); ++n) {
      const double* row = &in.data[n * in.cols()];
      for (std::size_t c = 0; c < shape.ch; ++c) {
        const double* chan = row + c * shape.h * shape.w;
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t xx = 0; xx < ow; ++xx) {
            // first (lowest-index) max in the window takes the gradient
            std::size_t best = (y * k) * shape.w + xx * k;
            for (std::size_t kh = 0; kh < k; ++kh)
              for (std::size_t kw = 0; kw < k; ++kw) {
                std::size_t idx = (y * k + kh) * shape.w + xx * k + kw;
                if (chan[idx] > chan[best]) best = idx;
              }
            dx.data[n * in.cols() + c * shape.h * shape.w + best] +=
                dout.data[n * dout.cols() + c * oh * ow + y * ow + xx];
          }
        }
      }
    }
    return dx;
  }
  return dout;  // flatten
}

}  // namespace detail

// Cross-entropy in nats on log-softmax outputs. Gradient blocks are present
// only when requested.
inline std::pair<LossReport, Gradients> loss_and_grads(const Network& net, const Tensor& x,
                                                       const std::vector<int>& y,
                                                       bool need_input_grad,
                                                       bool need_param_grad) {
  std::vector<Tensor> trace = forward_trace(net, x);
  const Tensor& logits = trace.back();
  const std::size_t b = logits.rows(), k = logits.cols();
  detail::check_labels(y, b, k);

  LossReport report;
  report.log_probs = log_softmax(logits);
  report.per_example_loss = Tensor({b});
  for (std::size_t i = 0; i < b; ++i) {
    report.per_example_loss.data[i] = -report.log_probs(i, static_cast<std::size_t>(y[i]));
    report.mean_loss += report.per_example_loss.data[i];
  }
  report.mean_loss /= static_cast<double>(b);

  Gradients grads;
  if (!need_input_grad && !need_param_grad) return {std::move(report), std::move(grads)};

  // d(mean loss)/d(logits) = (softmax - onehot) / B
  Tensor dout({b, k});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double sm = std::exp(report.log_probs(i, j));
      dout(i, j) = (sm - (static_cast<std::size_t>(y[i]) == j ? 1.0 : 0.0)) /
                   static_cast<double>(b);
    }
  }

  for (std::size_t i = net.layers.size(); i-- > 0;) {
    ParamGrad pg;
    bool wants = need_param_grad && net.params[i].has_params();
    dout = detail::layer_backward(net.layers[i], net.params[i], trace[i], trace[i + 1], dout,
                                  wants, &pg, detail::channels_before(net.layers, i));
    if (wants) grads.by_parameter.emplace(i, std::move(pg));
  }
  if (need_input_grad) grads.by_input = std::move(dout);
  return {std::move(report), std::move(grads)};
}

// theta <- theta - lr * grad(theta)
inline Network sgd_step(const Network& net, const Gradients& grads, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("sgd_step: bad learning rate " + std::to_string(lr));
  }
  Network out = net;
  for (std::size_t i = 0; i < out.layers.size(); ++i) {
    if (!out.params[i].has_params()) continue;
    auto it = grads.by_parameter.find(i);
    if (it == grads.by_parameter.end()) {
      throw std::invalid_argument("sgd_step: missing gradient for layer " + std::to_string(i) +
                                  " (" + spec_str(out.layers[i]) + ")");
    }
    detail::require_same_shape(out.params[i].weight, it->second.weight, "sgd_step weight");
    detail::require_same_shape(out.params[i].bias, it->second.bias, "sgd_step bias");
    for (std::size_t j = 0; j < out.params[i].weight.size(); ++j)
      out.params[i].weight.data[j] -= lr * it->second.weight.data[j];
    for (std::size_t j = 0; j < out.params[i].bias.size(); ++j)
      out.params[i].bias.data[j] -= lr * it->second.bias.data[j];
  }
  return out;
}

// Fraction of rows whose argmax logit equals y; ties break to the lowest index.
inline double accuracy(const Network& net, const Tensor& x, const std::vector<int>& y) {
  Tensor logits = forward(net, x);
  detail::check_labels(y, logits.rows(), logits.cols());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, arg)) arg = j;
    if (arg == static_cast<std::size_t>(y[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

// ---- checkpoint file ("CATN"): header, per-layer specs, f64 parameter blobs,
// all little-endian; round-trips bit-exactly ----

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<char*>(b), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<char*>(b), 8);
}

inline void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is) {
  std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace detail

inline void save_network(const Network& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  os.write("CATN", 4);
  detail::put_u32(os, 1);  // version
  detail::put_u64(os, net.rng_seed);
  detail::put_u32(os, static_cast<std::uint32_t>(net.layers.size()));
  for (const LayerSpec& s : net.layers) {
    std::uint32_t kind = 0;
    std::array<std::uint64_t, 4> f{};
    if (auto* d = std::get_if<DenseSpec>(&s)) {
      kind = 0;
      f = {d->in_dim, d->out_dim, 0, 0};
    } else if (std::get_if<ReluSpec>(&s)) {
      kind = 1;
    } else if (auto* c = std::get_if<Conv2dSpec>(&s)) {
      kind = 2;
      f = {c->in_ch, c->out_ch, c->kernel, c->stride};
    } else if (auto* p = std::get_if<MaxPool2dSpec>(&s)) {
      kind = 3;
      f = {p->kernel, 0, 0, 0};
    } else {
      kind = 4;
    }
    detail::put_u32(os, kind);
    for (auto v : f) detail::put_u64(os, v);
  }
  for (const LayerParams& p : net.params) {
    if (!p.has_params()) continue;
    for (double v : p.weight.data) detail::put_f64(os, v);
    for (double v : p.bias.data) detail::put_f64(os, v);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

inline Network load_network(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4)) throw std::runtime_error("checkpoint: truncated file " + path);
  if (std::string(magic, 4) != "CATN") {
    throw std::runtime_error("checkpoint: bad magic \"" + std::string(magic, 4) + "\" in " +
                             path);
  }
  std::uint32_t version = detail::get_u32(is);
  if (version != 1) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  std::uint64_t seed = detail::get_u64(is);
  std::uint32_t count = detail::get_u32(is);
  std::vector<LayerSpec> specs;
  specs.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t kind = detail::get_u32(is);
    std::array<std::uint64_t, 4> f{};
    for (auto& v : f) v = detail::get_u64(is);
    switch (kind) {
      case 0: specs.push_back(DenseSpec{f[0], f[1]}); break;
      case 1: specs.push_back(ReluSpec{}); break;
      case 2: specs.push_back(Conv2dSpec{f[0], f[1], f[2], f[3]}); break;
      case 3: specs.push_back(MaxPool2dSpec{f[0]}); break;
      case 4: specs.push_back(FlattenSpec{}); break;
      default:
        throw std::runtime_error("checkpoint: unknown layer kind " + std::to_string(kind));
    }
  }
  Network net = init_network(specs, 0);
  net.rng_seed = seed;
  for (LayerParams& p : net.params) {
    if (!p.has_params()) continue;
    for (double& v : p.weight.data) v = detail::get_f64(is);
    for (double& v : p.bias.data) v = detail::get_f64(is);
  }
  return net;
}

}  // namespace catrain
