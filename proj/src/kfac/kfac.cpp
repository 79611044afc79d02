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

#include "kfac/kfac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/rng.hpp"
#include "tensornet/conv.hpp"

namespace aqs::kfac {

namespace {

using tensornet::Tensor;

core::Mat with_ones_column(const core::Mat& m) {
  core::Mat out(m.rows(), m.cols() + 1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out(r, 0) = 1.0;
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c + 1) = m(r, c);
  }
  return out;
}

// (1/denom) * rows^T rows
core::Mat scaled_gram(const core::Mat& rows, double denom) {
  core::Mat g = core::gram_of_rows(rows);
  const double inv = 1.0 / denom;
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] *= inv;
  return g;
}

core::Mat as_rows(const Tensor& t, int row_width) {
  core::Mat m(t.data.size() / row_width, row_width);
  std::copy(t.data.begin(), t.data.end(), m.data());
  return m;
}

}  // namespace

core::Mat expand_patches(const Tensor& acts, int kernel, int stride, int pad,
                         bool homogeneous) {
  core::Mat cols = tensornet::im2col(acts, kernel, stride, pad);
  return homogeneous ? with_ones_column(cols) : cols;
}

core::Mat expand_patches_depthwise(const Tensor& acts, int kernel, int stride,
                                   int pad, bool homogeneous) {
  core::Mat cols = tensornet::im2col_depthwise(acts, kernel, stride, pad);
  return homogeneous ? with_ones_column(cols) : cols;
}

KfacFactors kfac_factors(const tensornet::BatchTrace& trace,
                         const tensornet::NetworkSpec& spec) {
  KfacFactors f;
  const double m_fwd = trace.batch;
  int wl = 0;
  for (const auto& layer : spec.layers) {
    if (auto* d = std::get_if<tensornet::DenseSpec>(&layer)) {
      core::Mat a = as_rows(trace.inputs[wl], d->in);
      if (d->bias) a = with_ones_column(a);
      f.omega.push_back(scaled_gram(a, m_fwd));
      const core::Mat g = as_rows(trace.preact_grads[wl], d->out);
      f.gamma.push_back(scaled_gram(g, static_cast<double>(g.rows())));
      ++wl;
    } else if (auto* c = std::get_if<tensornet::Conv2dSpec>(&layer)) {
      core::Mat a =
          expand_patches(trace.inputs[wl], c->kernel, c->stride, c->padding, c->bias);
      f.omega.push_back(scaled_gram(a, m_fwd));
      const Tensor& gp = trace.preact_grads[wl];
      const int positions = gp.shape[1] * gp.shape[2];
      const core::Mat g = as_rows(gp, c->out_ch);
      // E[DS^T DS] over the batch, then the 1/|T| spatial normalization
      const double m_bwd = static_cast<double>(g.rows()) / positions;
      f.gamma.push_back(scaled_gram(g, m_bwd * positions));
      ++wl;
    } else if (auto* dw = std::get_if<tensornet::Depthwise2dSpec>(&layer)) {
      core::Mat a = expand_patches_depthwise(trace.inputs[wl], dw->kernel,
                                             dw->stride, dw->padding, dw->bias);
      f.omega.push_back(scaled_gram(a, m_fwd));
      const Tensor& gp = trace.preact_grads[wl];
      const int positions = gp.shape[1] * gp.shape[2];
      const core::Mat g = as_rows(gp, dw->ch);
      const double m_bwd = static_cast<double>(g.rows()) / positions;
      f.gamma.push_back(scaled_gram(g, m_bwd * positions));
      ++wl;
    }
  }
  return f;
}

std::vector<double> symmetric_eigenvalues(const core::Mat& input) {
  const std::size_t n = input.rows();
  if (!input.all_finite())
    return std::vector<double>(n, std::numeric_limits<double>::quiet_NaN());
  core::Mat a = input;
  const double scale = std::fmax(1.0, a.frobenius_norm());
  const double tol = 1e-12 * scale;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) < tol) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double diff = a(q, q) - a(p, p);
        double t;
        if (std::fabs(apq) < 1e-300 * std::fabs(diff)) {
          t = apq / diff;
        } else {
          const double theta = diff / (2.0 * apq);
          t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // A <- J^T A J on rows/columns p and q
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  std::vector<double> eigs(n);
  for (std::size_t i = 0; i < n; ++i) eigs[i] = a(i, i);
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

SpectrumFeature spectrum(const KfacFactors& factors,
                         const tensornet::NetworkSpec& spec) {
  SpectrumFeature sf;
  for (std::size_t l = 0; l < factors.omega.size(); ++l) {
    LayerSpectrum layer;
    layer.w = spec.param_count(static_cast<int>(l));

    const core::Mat& omega = factors.omega[l];
    const core::Mat& gamma = factors.gamma[l];
    if (!omega.all_finite() || !gamma.all_finite()) sf.valid = false;
    for (const core::Mat* m : {&omega, &gamma}) {
      for (std::size_t i = 0; i < m->size(); ++i) {
        if (std::fabs(m->data()[i]) > 3.4028234663852886e38) {
          sf.degenerate = true;  // beyond single-precision range
          break;
        }
      }
    }

    std::vector<double> eo = symmetric_eigenvalues(omega);
    std::vector<double> eg = symmetric_eigenvalues(gamma);
    bool gamma_clamped = true;
    for (double& v : eg) {
      if (std::isnan(v)) {
        sf.valid = false;
      } else if (v > kEigClamp) {
        gamma_clamped = false;
      }
    }
    layer.gamma_all_clamped = gamma_clamped;
    if (gamma_clamped) sf.degenerate = true;

    std::vector<double> log_o(eo.size()), log_g(eg.size());
    for (std::size_t i = 0; i < eo.size(); ++i) {
      if (std::isnan(eo[i])) sf.valid = false;
      log_o[i] = std::log(std::fmax(eo[i], kEigClamp));
    }
    for (std::size_t i = 0; i < eg.size(); ++i)
      log_g[i] = std::log(std::fmax(eg[i], kEigClamp));

    layer.log_eigs.reserve(log_o.size() * log_g.size());
    for (double lo : log_o)
      for (double lg : log_g) layer.log_eigs.push_back(lo + lg);
    std::sort(layer.log_eigs.begin(), layer.log_eigs.end());
    for (double v : layer.log_eigs)
      if (!std::isfinite(v)) sf.valid = false;

    layer.bins = std::max(1, static_cast<int>(layer.w / 100));
    layer.counts.assign(layer.bins, 0);
    const double width = (kHistHi - kHistLo) / layer.bins;
    for (double v : layer.log_eigs) {
      if (std::isnan(v)) continue;
      int idx = static_cast<int>(std::floor((v - kHistLo) / width));
      idx = std::clamp(idx, 0, layer.bins - 1);  // out-of-range mass in edge bins
      ++layer.counts[idx];
    }
    sf.layers.push_back(std::move(layer));
  }
  return sf;
}

bool is_valid(const SpectrumFeature& sf) { return sf.valid; }

SpectrumFeature compute_spectrum(const tensornet::Task& task,
                                 const afdsl::ActivationGraph& activation,
                                 const FimConfig& cfg) {
  tensornet::Network net = tensornet::init_weights(task.net, activation, cfg.seed);

  // seeded mini-batch of task inputs
  core::Rng rng(core::derive_seed(cfg.seed, 0x5eed));
  const int n = task.data.train_x.batch();
  const int m = std::min(cfg.batch, n);
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  rng.shuffle(pick);
  std::vector<int> shape = task.data.train_x.shape;
  shape[0] = m;
  Tensor batch(shape);
  const std::size_t item = task.data.train_x.item_size();
  for (int i = 0; i < m; ++i)
    std::copy(task.data.train_x.item(pick[i]), task.data.train_x.item(pick[i]) + item,
              batch.item(i));

  tensornet::BatchTrace trace = tensornet::forward(net, batch, /*with_derivs=*/true);
  tensornet::backward_sampled(net, trace, cfg.mc_samples,
                              core::derive_seed(cfg.seed, 0x1abe1));
  KfacFactors factors = kfac_factors(trace, task.net);
  return spectrum(factors, task.net);
}

}  // namespace aqs::kfac
