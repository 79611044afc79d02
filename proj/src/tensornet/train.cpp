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

#include "tensornet/train.hpp"

#include <cmath>
#include <stdexcept>

#include "core/rng.hpp"
#include "tensornet/conv.hpp"

namespace aqs::tensornet {

void TrainConfig::validate() const {
  if (epochs <= 0 || batch_size <= 0 || peak_lr <= 0.0 || warmup_epochs < 0)
    throw std::invalid_argument("train config fields must be positive");
  if (warmup_epochs > epochs)
    throw std::invalid_argument("warmup_epochs must not exceed epochs");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("momentum must be in [0, 1)");
}

namespace {

Tensor gather_rows(const Tensor& x, const std::vector<int>& idx, int lo, int hi) {
  std::vector<int> shape = x.shape;
  shape[0] = hi - lo;
  Tensor out(shape);
  const std::size_t item = x.item_size();
  for (int i = lo; i < hi; ++i)
    std::copy(x.item(idx[i]), x.item(idx[i]) + item, out.item(i - lo));
  return out;
}

struct Grads {
  std::vector<core::Mat> w;
  std::vector<std::vector<double>> b;
};

// Batch-mean parameter gradients from per-sample pre-activation gradients.
Grads weight_grads(const Network& net, const BatchTrace& trace) {
  Grads g;
  const double inv_m = 1.0 / trace.batch;
  int wl = 0;
  for (const auto& layer : net.spec.layers) {
    if (auto* d = std::get_if<DenseSpec>(&layer)) {
      const Tensor& x = trace.inputs[wl];
      const Tensor& gp = trace.preact_grads[wl];
      core::Mat gw(d->out, d->in);
      std::vector<double> gb(net.biases[wl].size(), 0.0);
      for (int m = 0; m < trace.batch; ++m) {
        const double* xr = x.item(m);
        const double* gr = gp.item(m);
        for (int o = 0; o < d->out; ++o) {
          const double go = gr[o] * inv_m;
          if (go == 0.0) continue;
          double* row = gw.data() + static_cast<std::size_t>(o) * d->in;
          for (int i = 0; i < d->in; ++i) row[i] += go * xr[i];
          if (!gb.empty()) gb[o] += go;
        }
      }
      g.w.push_back(std::move(gw));
      g.b.push_back(std::move(gb));
      ++wl;
    } else if (auto* c = std::get_if<Conv2dSpec>(&layer)) {
      core::Mat cols = im2col(trace.inputs[wl], c->kernel, c->stride, c->padding);
      const Tensor& gp = trace.preact_grads[wl];
      const std::size_t patch_len = cols.cols();
      core::Mat gw(c->out_ch, patch_len);
      std::vector<double> gb(net.biases[wl].size(), 0.0);
      for (std::size_t r = 0; r < cols.rows(); ++r) {
        const double* gr = gp.data.data() + r * c->out_ch;
        const double* patch = cols.data() + r * patch_len;
        for (int o = 0; o < c->out_ch; ++o) {
          const double go = gr[o] * inv_m;
          if (go == 0.0) continue;
          double* row = gw.data() + static_cast<std::size_t>(o) * patch_len;
          for (std::size_t i = 0; i < patch_len; ++i) row[i] += go * patch[i];
          if (!gb.empty()) gb[o] += go;
        }
      }
      g.w.push_back(std::move(gw));
      g.b.push_back(std::move(gb));
      ++wl;
    } else if (auto* dw = std::get_if<Depthwise2dSpec>(&layer)) {
      core::Mat cols =
          im2col_depthwise(trace.inputs[wl], dw->kernel, dw->stride, dw->padding);
      const Tensor& gp = trace.preact_grads[wl];
      const std::size_t patch_len = cols.cols();
      core::Mat gw(dw->ch, patch_len);
      std::vector<double> gb(net.biases[wl].size(), 0.0);
      for (std::size_t r = 0; r < cols.rows(); ++r) {
        const int ci = static_cast<int>(r % dw->ch);
        const double go = gp.data[r] * inv_m;
        if (go == 0.0) continue;
        const double* patch = cols.data() + r * patch_len;
        double* row = gw.data() + static_cast<std::size_t>(ci) * patch_len;
        for (std::size_t i = 0; i < patch_len; ++i) row[i] += go * patch[i];
        if (!gb.empty()) gb[ci] += go;
      }
      g.w.push_back(std::move(gw));
      g.b.push_back(std::move(gb));
      ++wl;
    }
  }
  return g;
}

double mean_cross_entropy(const core::Mat& probs, const std::vector<int>& labels) {
  double loss = 0.0;
  for (std::size_t m = 0; m < probs.rows(); ++m)
    loss -= std::log(std::fmax(probs(m, labels[m]), 1e-300));
  return loss / static_cast<double>(probs.rows());
}

}  // namespace

double evaluate_accuracy(const Network& net, const Tensor& x,
                         const std::vector<int>& y) {
  BatchTrace trace = forward(net, x, /*with_derivs=*/false);
  int correct = 0;
  for (int m = 0; m < x.batch(); ++m) {
    int best = 0;
    for (std::size_t c = 1; c < trace.logits.cols(); ++c)
      if (trace.logits(m, c) > trace.logits(m, best)) best = static_cast<int>(c);
    if (best == y[m]) ++correct;
  }
  return static_cast<double>(correct) / x.batch();
}

TrainResult train(Network& net, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult result;
  const int n = data.train_x.batch();
  const int steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const long total_steps = static_cast<long>(steps_per_epoch) * cfg.epochs;
  const long warmup_steps = static_cast<long>(steps_per_epoch) * cfg.warmup_epochs;

  std::vector<core::Mat> vel_w;
  std::vector<std::vector<double>> vel_b;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    vel_w.emplace_back(net.weights[l].rows(), net.weights[l].cols());
    vel_b.emplace_back(net.biases[l].size(), 0.0);
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  const double chance = 1.0 / data.num_classes;
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs && !result.failed; ++epoch) {
    core::Rng rng(core::derive_seed(cfg.seed, epoch));
    rng.shuffle(order);
    for (int lo = 0; lo < n; lo += cfg.batch_size, ++step) {
      const int hi = std::min(n, lo + cfg.batch_size);
      Tensor batch = gather_rows(data.train_x, order, lo, hi);
      std::vector<int> labels(order.begin() + lo, order.begin() + hi);
      for (auto& l : labels) l = data.train_y[l];

      BatchTrace trace = forward(net, batch, /*with_derivs=*/true);
      const double loss = mean_cross_entropy(trace.probs, labels);
      if (!trace.finite || !std::isfinite(loss)) {
        result.failed = true;
        break;
      }
      backward(net, trace, labels);
      Grads g = weight_grads(net, trace);

      double lr;
      if (step < warmup_steps) {
        lr = cfg.peak_lr * static_cast<double>(step + 1) / warmup_steps;
      } else if (total_steps > warmup_steps) {
        lr = cfg.peak_lr *
             (1.0 - static_cast<double>(step - warmup_steps) /
                        static_cast<double>(total_steps - warmup_steps));
      } else {
        lr = cfg.peak_lr;
      }

      for (std::size_t l = 0; l < net.weights.size(); ++l) {
        double* w = net.weights[l].data();
        double* v = vel_w[l].data();
        const double* gw = g.w[l].data();
        for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
          v[i] = cfg.momentum * v[i] + gw[i];
          w[i] -= lr * v[i];
        }
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
          vel_b[l][i] = cfg.momentum * vel_b[l][i] + g.b[l][i];
          net.biases[l][i] -= lr * vel_b[l][i];
        }
      }
    }
    if (result.failed) break;
    const double acc = evaluate_accuracy(net, data.val_x, data.val_y);
    result.epoch_val_accuracy.push_back(acc);
    result.best_val_accuracy = std::fmax(result.best_val_accuracy, acc);
  }

  if (result.failed) result.best_val_accuracy = chance;
  return result;
}

}  // namespace aqs::tensornet
