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

#include <span>
#include <vector>

#include "afdsl/fingerprint.hpp"
#include "kfac/kfac.hpp"

namespace aqs::features {

// Activation outputs at the shared probe inputs. Identical to the dedup
// fingerprint values by construction.
struct OutputFeature {
  std::vector<double> values;
};

OutputFeature output_feature(const afdsl::ActivationGraph& graph,
                             std::span<const double> probes);

// Root-mean-square difference over the probes (the output distance metric).
double dist_outputs(std::span<const double> a, std::span<const double> b);

// Per-layer cumulative histogram scaled by bin_width / w_l and concatenated.
// The L1 distance between two of these equals the weighted layer-wise sum of
// 1-Wasserstein distances between the probability-normalized histograms.
struct SpectralCdfFeature {
  std::vector<double> values;
  std::vector<int> layer_bins;
  std::vector<std::int64_t> layer_w;
};

// Requires sf.valid; invalid spectra are never embedded.
SpectralCdfFeature spectral_cdf(const kfac::SpectrumFeature& sf);

// Sum of coordinate-wise absolute differences; grids must match.
double dist_spectra(const SpectralCdfFeature& a, const SpectralCdfFeature& b);

}  // namespace aqs::features
