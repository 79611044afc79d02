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

#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "afdsl/graph.hpp"
#include "core/mat.hpp"
#include "tensornet/tensor.hpp"

namespace aqs::tensornet {

struct DenseSpec {
  int in = 0;
  int out = 0;
  bool bias = true;
};

struct Conv2dSpec {
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 3;
  int stride = 1;
  int padding = 0;
  bool bias = true;
};

struct Depthwise2dSpec {
  int ch = 0;
  int kernel = 3;
  int stride = 1;
  int padding = 0;
  bool bias = true;
};

struct GlobalAvgPoolSpec {};
struct FlattenSpec {};
struct SoftmaxHeadSpec {};

using LayerSpec = std::variant<DenseSpec, Conv2dSpec, Depthwise2dSpec,
                               GlobalAvgPoolSpec, FlattenSpec, SoftmaxHeadSpec>;

// Ordered layer list ending in a softmax head. The activation function is
// applied element-wise after every weighted layer except the last weighted
// layer (whose outputs are the logits).
struct NetworkSpec {
  std::vector<LayerSpec> layers;

  int weighted_layer_count() const;
  // Trainable parameter count (weights + bias) of weighted layer wl.
  std::int64_t param_count(int wl) const;
  // Stable digest of the architecture, recorded in file headers.
  std::uint64_t digest() const;
  std::string describe() const;
  // Validates shape compatibility given the input shape (throws).
  void check(const std::vector<int>& input_shape) const;
};

struct Network {
  NetworkSpec spec;
  afdsl::ActivationGraph activation;
  // Per weighted layer: weight matrix in (out x in) layout; conv kernels are
  // flattened as out_ch x (kernel*kernel*in_ch) in (dy, dx, channel) order;
  // depthwise as ch x (kernel*kernel).
  std::vector<core::Mat> weights;
  std::vector<std::vector<double>> biases;
};

// Weights drawn i.i.d. from N(0, 2/fan_in); biases zero. Deterministic and
// symmetric about zero.
Network init_weights(const NetworkSpec& spec, const afdsl::ActivationGraph& act,
                     std::uint64_t seed);

// Forward and backward bookkeeping. `inputs[l]` is the input to weighted
// layer l (the homogeneous coordinate is appended later, by the consumers),
// `preacts[l]` its pre-activation outputs, `act_derivs[l]` the activation
// derivative at those pre-activations. After a backward pass,
// `preact_grads[l]` holds per-sample loss gradients w.r.t. the
// pre-activations (loss is per-sample, not batch-averaged). With several
// sampled-label draws the gradient rows of all draws are stacked along the
// batch dimension.
struct BatchTrace {
  int batch = 0;
  std::vector<Tensor> inputs;
  std::vector<Tensor> preacts;
  std::vector<Tensor> act_derivs;
  std::vector<Tensor> preact_grads;
  core::Mat logits;
  core::Mat probs;  // softmax rows
  bool finite = true;
};

// Runs the network, recording per-layer activations. `with_derivs` also
// evaluates activation derivatives (needed before any backward pass).
BatchTrace forward(const Network& net, const Tensor& input, bool with_derivs);

// Backpropagates per-sample cross-entropy gradients for the given labels
// into trace.preact_grads. labels.size() must equal the batch.
void backward(const Network& net, BatchTrace& trace, const std::vector<int>& labels);

// Fisher-style backward: labels are drawn from the model's own softmax
// distribution; mc_samples draws are stacked along the batch dimension.
void backward_sampled(const Network& net, BatchTrace& trace, int mc_samples,
                      std::uint64_t seed);

// The sign-flip construction: with activation -phi and the weights of every
// layer after the first negated, the network computes the same input->logit
// map. `flip_biases` additionally negates biases from layer 2 on (equivalent
// whenever those biases are zero).
Network negation_transform(const Network& net, bool flip_biases);

core::Mat softmax_rows(const core::Mat& logits);

}  // namespace aqs::tensornet
