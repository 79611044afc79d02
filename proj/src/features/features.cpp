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

#include "features/features.hpp"

#include <cmath>
#include <stdexcept>

namespace aqs::features {

OutputFeature output_feature(const afdsl::ActivationGraph& graph,
                             std::span<const double> probes) {
  return OutputFeature{graph.evaluate(probes)};
}

double dist_outputs(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("output feature lengths differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

SpectralCdfFeature spectral_cdf(const kfac::SpectrumFeature& sf) {
  if (!sf.valid)
    throw std::invalid_argument("invalid spectra cannot be embedded");
  SpectralCdfFeature out;
  for (const auto& layer : sf.layers) {
    out.layer_bins.push_back(layer.bins);
    out.layer_w.push_back(layer.w);
    std::int64_t total = 0;
    for (auto c : layer.counts) total += c;
    const double width = (kfac::kHistHi - kfac::kHistLo) / layer.bins;
    const double scale = width / static_cast<double>(layer.w);
    double cum = 0.0;
    for (auto c : layer.counts) {
      cum += static_cast<double>(c) / static_cast<double>(total);
      out.values.push_back(cum * scale);
    }
  }
  return out;
}

double dist_spectra(const SpectralCdfFeature& a, const SpectralCdfFeature& b) {
  if (a.layer_bins != b.layer_bins || a.layer_w != b.layer_w)
    throw std::invalid_argument("spectral features use different grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    acc += std::fabs(a.values[i] - b.values[i]);
  return acc;
}

}  // namespace aqs::features
