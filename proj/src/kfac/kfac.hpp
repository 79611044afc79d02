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
#include <vector>

#include "core/mat.hpp"
#include "tensornet/net.hpp"
#include "tensornet/task.hpp"

namespace aqs::kfac {

// Kronecker-factored curvature blocks, one (input-side, gradient-side) pair
// per weighted layer. The full block is omega (x) gamma.
struct KfacFactors {
  std::vector<core::Mat> omega;
  std::vector<core::Mat> gamma;
};

// Patch expansion with an optional homogeneous ones column prepended.
// Standard convolution: rows (sample, position), M|T| x (J|D|[+1]).
core::Mat expand_patches(const tensornet::Tensor& acts, int kernel, int stride,
                         int pad, bool homogeneous);
// Depthwise: rows (sample, position, channel), M|T|J x (|D|[+1]).
core::Mat expand_patches_depthwise(const tensornet::Tensor& acts, int kernel,
                                   int stride, int pad, bool homogeneous);

// Empirical second-moment factors from one forward + sampled backward pass:
// omega from the layer-input activations (homogeneous column appended when
// the layer has a bias), gamma from the pre-activation gradients with the
// 1/|T| spatial normalization on convolutional layers. Non-finite entries
// propagate into the factors; validity is judged in spectrum().
KfacFactors kfac_factors(const tensornet::BatchTrace& trace,
                         const tensornet::NetworkSpec& spec);

struct LayerSpectrum {
  std::int64_t w = 0;                  // layer parameter count
  std::vector<double> log_eigs;        // sorted pairwise sums of factor log-eigenvalues
  int bins = 1;
  std::vector<std::int64_t> counts;    // histogram over [-100, 100], edges clipped in
  bool gamma_all_clamped = false;      // no gradient signal reached this layer
};

struct SpectrumFeature {
  std::vector<LayerSpectrum> layers;
  bool valid = true;
  // A desk-scale analog of single-precision overflow: the gradient second
  // moment vanished at some layer, or a factor entry left float32 range.
  bool degenerate = false;
};

inline constexpr double kEigClamp = 1e-30;
inline constexpr double kHistLo = -100.0;
inline constexpr double kHistHi = 100.0;

// Symmetric eigendecomposition per factor, natural-log eigenvalues clamped
// below at kEigClamp, all pairwise sums per layer, histogram over
// max(1, floor(w/100)) bins.
SpectrumFeature spectrum(const KfacFactors& factors,
                         const tensornet::NetworkSpec& spec);

bool is_valid(const SpectrumFeature& sf);

// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending. Non-finite
// inputs yield a NaN-filled result instead of an error.
std::vector<double> symmetric_eigenvalues(const core::Mat& a);

struct FimConfig {
  int batch = 128;     // inputs in the estimation mini-batch
  int mc_samples = 1;  // label draws per input
  std::uint64_t seed = 1;
};

// End-to-end: initialize the task network with the given activation, run
// one forward/backward on a seeded mini-batch, and return the spectrum.
SpectrumFeature compute_spectrum(const tensornet::Task& task,
                                 const afdsl::ActivationGraph& activation,
                                 const FimConfig& cfg);

}  // namespace aqs::kfac
