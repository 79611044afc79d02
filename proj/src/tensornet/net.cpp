// Copyright 2026 The aqs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tensornet/net.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "core/hash.hpp"
#include "core/rng.hpp"
#include "tensornet/conv.hpp"

namespace aqs::tensornet {

namespace {

bool is_weighted(const LayerSpec& l) {
  return std::holds_alternative<DenseSpec>(l) ||
         std::holds_alternative<Conv2dSpec>(l) ||
         std::holds_alternative<Depthwise2dSpec>(l);
}

// Index (into weighted layers) of the last weighted layer; its outputs are
// the logits and skip the activation.
int last_weighted(const NetworkSpec& spec) {
  int count = 0;
  for (const auto& l : spec.layers)
    if (is_weighted(l)) ++count;
  return count - 1;
}

std::vector<int> layer_output_shape(const LayerSpec& layer,
                                    const std::vector<int>& in) {
  if (auto* d = std::get_if<DenseSpec>(&layer)) {
    if (in.size() != 2 || in[1] != d->in)
      throw std::invalid_argument("dense layer shape mismatch");
    return {in[0], d->out};
  }
  if (auto* c = std::get_if<Conv2dSpec>(&layer)) {
    if (in.size() != 4 || in[3] != c->in_ch)
      throw std::invalid_argument("conv2d layer shape mismatch");
    ConvGeom g = conv_out_shape(in[1], in[2], c->kernel, c->stride, c->padding);
    if (g.h_out <= 0 || g.w_out <= 0)
      throw std::invalid_argument("conv2d output collapses to zero size");
    return {in[0], g.h_out, g.w_out, c->out_ch};
  }
  if (auto* dw = std::get_if<Depthwise2dSpec>(&layer)) {
    if (in.size() != 4 || in[3] != dw->ch)
      throw std::invalid_argument("depthwise2d layer shape mismatch");
    ConvGeom g = conv_out_shape(in[1], in[2], dw->kernel, dw->stride, dw->padding);
    if (g.h_out <= 0 || g.w_out <= 0)
      throw std::invalid_argument("depthwise2d output collapses to zero size");
    return {in[0], g.h_out, g.w_out, dw->ch};
  }
  if (std::holds_alternative<GlobalAvgPoolSpec>(layer)) {
    if (in.size() != 4) throw std::invalid_argument("global_avg_pool needs an image");
    return {in[0], in[3]};
  }
  if (std::holds_alternative<FlattenSpec>(layer)) {
    int flat = 1;
    for (std::size_t i = 1; i < in.size(); ++i) flat *= in[i];
    return {in[0], flat};
  }
  return in;  // softmax head keeps the logits shape
}

}  // namespace

int NetworkSpec::weighted_layer_count() const {
  int n = 0;
  for (const auto& l : layers)
    if (is_weighted(l)) ++n;
  return n;
}

std::int64_t NetworkSpec::param_count(int wl) const {
  int seen = 0;
  for (const auto& l : layers) {
    if (!is_weighted(l)) continue;
    if (seen++ != wl) continue;
    if (auto* d = std::get_if<DenseSpec>(&l))
      return static_cast<std::int64_t>(d->out) * (d->in + (d->bias ? 1 : 0));
    if (auto* c = std::get_if<Conv2dSpec>(&l))
      return static_cast<std::int64_t>(c->out_ch) *
             (c->kernel * c->kernel * c->in_ch + (c->bias ? 1 : 0));
    if (auto* dw = std::get_if<Depthwise2dSpec>(&l))
      return static_cast<std::int64_t>(dw->ch) *
             (dw->kernel * dw->kernel + (dw->bias ? 1 : 0));
  }
  throw std::out_of_range("weighted layer index out of range");
}

std::string NetworkSpec::describe() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& l : layers) {
    if (!first) os << "|";
    first = false;
    if (auto* d = std::get_if<DenseSpec>(&l))
      os << "dense(" << d->in << "," << d->out << (d->bias ? ",b" : "") << ")";
    else if (auto* c = std::get_if<Conv2dSpec>(&l))
      os << "conv2d(" << c->in_ch << "," << c->out_ch << ",k" << c->kernel
         << ",s" << c->stride << ",p" << c->padding << (c->bias ? ",b" : "") << ")";
    else if (auto* dw = std::get_if<Depthwise2dSpec>(&l))
      os << "depthwise2d(" << dw->ch << ",k" << dw->kernel << ",s" << dw->stride
         << ",p" << dw->padding << (dw->bias ? ",b" : "") << ")";
    else if (std::holds_alternative<GlobalAvgPoolSpec>(l))
      os << "global_avg_pool";
    else if (std::holds_alternative<FlattenSpec>(l))
      os << "flatten";
    else
      os << "softmax_head";
  }
  return os.str();
}

std::uint64_t NetworkSpec::digest() const { return core::fnv1a64(describe()); }

void NetworkSpec::check(const std::vector<int>& input_shape) const {
  if (layers.empty() || !std::holds_alternative<SoftmaxHeadSpec>(layers.back()))
    throw std::invalid_argument("network must end with softmax_head");
  std::vector<int> shape = input_shape;
  for (const auto& l : layers) shape = layer_output_shape(l, shape);
  if (shape.size() != 2)
    throw std::invalid_argument("softmax head requires [batch, classes] input");
}

Network init_weights(const NetworkSpec& spec, const afdsl::ActivationGraph& act,
                     std::uint64_t seed) {
  Network net{spec, act, {}, {}};
  int wl = 0;
  for (const auto& l : spec.layers) {
    if (!is_weighted(l)) continue;
    core::Rng rng(core::derive_seed(seed, wl));
    int out = 0, fan_in = 0, cols = 0;
    bool bias = true;
    if (auto* d = std::get_if<DenseSpec>(&l)) {
      out = d->out, fan_in = d->in, cols = d->in, bias = d->bias;
    } else if (auto* c = std::get_if<Conv2dSpec>(&l)) {
      out = c->out_ch;
      fan_in = c->kernel * c->kernel * c->in_ch;
      cols = fan_in;
      bias = c->bias;
    } else if (auto* dw = std::get_if<Depthwise2dSpec>(&l)) {
      out = dw->ch;
      fan_in = dw->kernel * dw->kernel;
      cols = fan_in;
      bias = dw->bias;
    }
    core::Mat w(out, cols);
    const double stddev = std::sqrt(2.0 / fan_in);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.normal(0.0, stddev);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(bias ? out : 0, 0.0);
    ++wl;
  }
  return net;
}

core::Mat softmax_rows(const core::Mat& logits) {
  core::Mat probs(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    double mx = logits(r, 0);
    for (std::size_t c = 1; c < logits.cols(); ++c) mx = std::fmax(mx, logits(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      const double e = std::exp(logits(r, c) - mx);
      probs(r, c) = e;
      sum += e;
    }
    for (std::size_t c = 0; c < logits.cols(); ++c) probs(r, c) /= sum;
  }
  return probs;
}

BatchTrace forward(const Network& net, const Tensor& input, bool with_derivs) {
  const NetworkSpec& spec = net.spec;
  const int n_weighted = spec.weighted_layer_count();
  const int head = last_weighted(spec);

  BatchTrace trace;
  trace.batch = input.batch();
  trace.inputs.resize(n_weighted);
  trace.preacts.resize(n_weighted);
  trace.act_derivs.resize(n_weighted);
  trace.preact_grads.resize(n_weighted);

  Tensor cur = input;
  int wl = 0;
  for (const auto& layer : spec.layers) {
    if (auto* d = std::get_if<DenseSpec>(&layer)) {
      trace.inputs[wl] = cur;
      const int m = cur.shape[0];
      Tensor pre({m, d->out});
      const core::Mat& w = net.weights[wl];
      const auto& b = net.biases[wl];
      for (int mi = 0; mi < m; ++mi) {
        const double* x = cur.item(mi);
        double* y = pre.item(mi);
        for (int o = 0; o < d->out; ++o) {
          double acc = b.empty() ? 0.0 : b[o];
          const double* wr = w.data() + static_cast<std::size_t>(o) * d->in;
          for (int i = 0; i < d->in; ++i) acc += wr[i] * x[i];
          y[o] = acc;
        }
      }
      trace.preacts[wl] = pre;
      cur = std::move(pre);
    } else if (auto* c = std::get_if<Conv2dSpec>(&layer)) {
      trace.inputs[wl] = cur;
      const int m = cur.shape[0];
      const ConvGeom g =
          conv_out_shape(cur.shape[1], cur.shape[2], c->kernel, c->stride, c->padding);
      core::Mat cols = im2col(cur, c->kernel, c->stride, c->padding);
      Tensor pre({m, g.h_out, g.w_out, c->out_ch});
      const core::Mat& w = net.weights[wl];
      const auto& b = net.biases[wl];
      for (std::size_t r = 0; r < cols.rows(); ++r) {
        const double* patch = cols.data() + r * cols.cols();
        double* y = pre.data.data() + r * c->out_ch;
        for (int o = 0; o < c->out_ch; ++o) {
          double acc = b.empty() ? 0.0 : b[o];
          const double* wr = w.data() + static_cast<std::size_t>(o) * cols.cols();
          for (std::size_t i = 0; i < cols.cols(); ++i) acc += wr[i] * patch[i];
          y[o] = acc;
        }
      }
      trace.preacts[wl] = pre;
      cur = std::move(pre);
    } else if (auto* dw = std::get_if<Depthwise2dSpec>(&layer)) {
      trace.inputs[wl] = cur;
      const int m = cur.shape[0];
      const ConvGeom g = conv_out_shape(cur.shape[1], cur.shape[2], dw->kernel,
                                        dw->stride, dw->padding);
      core::Mat cols = im2col_depthwise(cur, dw->kernel, dw->stride, dw->padding);
      Tensor pre({m, g.h_out, g.w_out, dw->ch});
      const core::Mat& w = net.weights[wl];
      const auto& b = net.biases[wl];
      // row r of cols corresponds to flat output element r (channel-minor)
      for (std::size_t r = 0; r < cols.rows(); ++r) {
        const int ci = static_cast<int>(r % dw->ch);
        const double* patch = cols.data() + r * cols.cols();
        double acc = b.empty() ? 0.0 : b[ci];
        const double* wr = w.data() + static_cast<std::size_t>(ci) * cols.cols();
        for (std::size_t i = 0; i < cols.cols(); ++i) acc += wr[i] * patch[i];
        pre.data[r] = acc;
      }
      trace.preacts[wl] = pre;
      cur = std::move(pre);
    } else if (std::holds_alternative<GlobalAvgPoolSpec>(layer)) {
      const int m = cur.shape[0], h = cur.shape[1], w2 = cur.shape[2],
                ch = cur.shape[3];
      Tensor out({m, ch});
      const double inv = 1.0 / (static_cast<double>(h) * w2);
      for (int mi = 0; mi < m; ++mi) {
        const double* x = cur.item(mi);
        double* y = out.item(mi);
        for (int p = 0; p < h * w2; ++p)
          for (int ci = 0; ci < ch; ++ci) y[ci] += x[p * ch + ci];
        for (int ci = 0; ci < ch; ++ci) y[ci] *= inv;
      }
      cur = std::move(out);
      continue;
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      Tensor out({cur.shape[0], static_cast<int>(cur.item_size())});
      out.data = cur.data;
      cur = std::move(out);
      continue;
    } else {  // softmax head
      const int m = cur.shape[0], k = cur.shape[1];
      trace.logits = core::Mat(m, k);
      std::copy(cur.data.begin(), cur.data.end(), trace.logits.data());
      trace.probs = softmax_rows(trace.logits);
      if (!cur.all_finite()) trace.finite = false;
      continue;
    }

    // activation after every weighted layer except the head
    if (!cur.all_finite()) trace.finite = false;
    if (wl != head) {
      Tensor act_out(cur.shape);
      if (with_derivs) {
        Tensor deriv(cur.shape);
        for (std::size_t i = 0; i < cur.data.size(); ++i) {
          afdsl::Dual d = net.activation.evaluate_dual(cur.data[i]);
          act_out.data[i] = d.v;
          deriv.data[i] = d.d;
        }
        trace.act_derivs[wl] = std::move(deriv);
      } else {
        for (std::size_t i = 0; i < cur.data.size(); ++i)
          act_out.data[i] = net.activation.evaluate(cur.data[i]);
      }
      if (!act_out.all_finite()) trace.finite = false;
      cur = std::move(act_out);
    }
    ++wl;
  }
  return trace;
}

void backward(const Network& net, BatchTrace& trace, const std::vector<int>& labels) {
  const NetworkSpec& spec = net.spec;
  const int head = last_weighted(spec);
  const int m = trace.batch;
  if (static_cast<int>(labels.size()) != m)
    throw std::invalid_argument("label count does not match batch");

  // Per-sample cross-entropy gradient at the logits.
  Tensor grad({m, static_cast<int>(trace.logits.cols())});
  for (int mi = 0; mi < m; ++mi) {
    double* g = grad.item(mi);
    for (std::size_t c = 0; c < trace.logits.cols(); ++c)
      g[c] = trace.probs(mi, c) - (static_cast<int>(c) == labels[mi] ? 1.0 : 0.0);
  }

  int wl = spec.weighted_layer_count() - 1;
  for (auto it = spec.layers.rbegin(); it != spec.layers.rend(); ++it) {
    const LayerSpec& layer = *it;
    if (std::holds_alternative<SoftmaxHeadSpec>(layer)) continue;
    if (std::holds_alternative<FlattenSpec>(layer)) {
      // restore the image shape of the layer below; handled lazily by the
      // next weighted layer via stored input shapes
      continue;
    }
    if (std::holds_alternative<GlobalAvgPoolSpec>(layer)) {
      // grad is [M, C]; expand to the pooled image shape
      // The producing layer's preact shape is known from the trace.
      const Tensor& pooled_src = trace.preacts[wl];  // layer wl produced it
      const int h = pooled_src.shape[1], w2 = pooled_src.shape[2],
                ch = pooled_src.shape[3];
      Tensor g({m, h, w2, ch});
      const double inv = 1.0 / (static_cast<double>(h) * w2);
      for (int mi = 0; mi < m; ++mi) {
        const double* src = grad.item(mi);
        double* dst = g.item(mi);
        for (int p = 0; p < h * w2; ++p)
          for (int ci = 0; ci < ch; ++ci) dst[p * ch + ci] = src[ci] * inv;
      }
      grad = std::move(g);
      continue;
    }

    // weighted layer: restore the pre-activation shape (undoes flatten),
    // apply the activation derivative (if not the head layer), record the
    // pre-activation gradient, then push through the weights.
    if (grad.shape != trace.preacts[wl].shape) {
      Tensor g;
      g.shape = trace.preacts[wl].shape;
      g.data = std::move(grad.data);
      grad = std::move(g);
    }
    if (wl != head) {
      const Tensor& deriv = trace.act_derivs[wl];
      if (deriv.data.empty())
        throw std::logic_error("backward requires forward(with_derivs=true)");
      for (std::size_t i = 0; i < grad.data.size(); ++i)
        grad.data[i] *= deriv.data[i];
    }
    trace.preact_grads[wl] = grad;

    if (auto* d = std::get_if<DenseSpec>(&layer)) {
      Tensor down({m, d->in});
      const core::Mat& w = net.weights[wl];
      for (int mi = 0; mi < m; ++mi) {
        const double* g = grad.item(mi);
        double* dst = down.item(mi);
        for (int o = 0; o < d->out; ++o) {
          const double go = g[o];
          if (go == 0.0) continue;
          const double* wr = w.data() + static_cast<std::size_t>(o) * d->in;
          for (int i = 0; i < d->in; ++i) dst[i] += go * wr[i];
        }
      }
      grad = std::move(down);
    } else if (auto* c = std::get_if<Conv2dSpec>(&layer)) {
      const Tensor& input = trace.inputs[wl];
      const std::size_t patch_len =
          static_cast<std::size_t>(c->kernel) * c->kernel * c->in_ch;
      core::Mat dcols(grad.data.size() / c->out_ch, patch_len);
      const core::Mat& w = net.weights[wl];
      for (std::size_t r = 0; r < dcols.rows(); ++r) {
        const double* g = grad.data.data() + r * c->out_ch;
        double* dst = dcols.data() + r * patch_len;
        for (int o = 0; o < c->out_ch; ++o) {
          const double go = g[o];
          if (go == 0.0) continue;
          const double* wr = w.data() + static_cast<std::size_t>(o) * patch_len;
          for (std::size_t i = 0; i < patch_len; ++i) dst[i] += go * wr[i];
        }
      }
      Tensor down(input.shape);
      col2im_add(dcols, c->kernel, c->stride, c->padding, down);
      grad = std::move(down);
    } else if (auto* dw = std::get_if<Depthwise2dSpec>(&layer)) {
      const Tensor& input = trace.inputs[wl];
      const std::size_t patch_len = static_cast<std::size_t>(dw->kernel) * dw->kernel;
      core::Mat dcols(grad.data.size(), patch_len);
      const core::Mat& w = net.weights[wl];
      for (std::size_t r = 0; r < dcols.rows(); ++r) {
        const int ci = static_cast<int>(r % dw->ch);
        const double go = grad.data[r];
        const double* wr = w.data() + static_cast<std::size_t>(ci) * patch_len;
        double* dst = dcols.data() + r * patch_len;
        for (std::size_t i = 0; i < patch_len; ++i) dst[i] = go * wr[i];
      }
      Tensor down(input.shape);
      col2im_depthwise_add(dcols, dw->kernel, dw->stride, dw->padding, down);
      grad = std::move(down);
    }
    --wl;
  }
}

void backward_sampled(const Network& net, BatchTrace& trace, int mc_samples,
                      std::uint64_t seed) {
  const int m = trace.batch;
  const int classes = static_cast<int>(trace.probs.cols());
  std::vector<std::vector<Tensor>> draws;
  for (int d = 0; d < mc_samples; ++d) {
    core::Rng rng(core::derive_seed(seed, d));
    std::vector<int> labels(m);
    for (int mi = 0; mi < m; ++mi) {
      // inverse-CDF draw from the row's softmax distribution
      const double u = rng.uniform();
      double acc = 0.0;
      int pick = classes - 1;
      for (int c = 0; c < classes; ++c) {
        acc += trace.probs(mi, c);
        if (u < acc) {
          pick = c;
          break;
        }
      }
      labels[mi] = pick;
    }
    backward(net, trace, labels);
    draws.push_back(trace.preact_grads);
  }
  if (mc_samples <= 1) return;
  // stack the draws along the batch dimension
  for (std::size_t l = 0; l < trace.preact_grads.size(); ++l) {
    Tensor stacked;
    stacked.shape = draws[0][l].shape;
    stacked.shape[0] *= mc_samples;
    stacked.data.reserve(draws[0][l].data.size() * mc_samples);
    for (int d = 0; d < mc_samples; ++d)
      stacked.data.insert(stacked.data.end(), draws[d][l].data.begin(),
                          draws[d][l].data.end());
    trace.preact_grads[l] = std::move(stacked);
  }
}

Network negation_transform(const Network& net, bool flip_biases) {
  Network out = net;
  out.activation = net.activation.negated();
  for (std::size_t l = 1; l < out.weights.size(); ++l) {
    for (std::size_t i = 0; i < out.weights[l].size(); ++i)
      out.weights[l].data()[i] = -out.weights[l].data()[i];
    if (flip_biases)
      for (double& b : out.biases[l]) b = -b;
  }
  return out;
}

}  // namespace aqs::tensornet
