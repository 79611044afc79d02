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

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace aqs::embed {

// Pairwise distance between two point indices of a fixed table.
using Metric = std::function<double(std::size_t, std::size_t)>;

struct Neighbor {
  std::uint32_t index = 0;
  double distance = 0.0;
};

struct KnnGraph {
  int k = 0;
  std::vector<std::vector<Neighbor>> neighbors;  // per point, ascending distance
};

// Exact k nearest neighbors by brute force (fine at desk scale).
KnnGraph knn_graph(std::size_t n_points, const Metric& metric, int k);

struct FuzzyEdge {
  std::uint32_t i = 0;
  std::uint32_t j = 0;  // i < j
  double weight = 0.0;  // in (0, 1]
};

// Symmetric fuzzy membership graph; edges sorted by (i, j), zero diagonal.
struct FuzzyGraph {
  std::size_t n = 0;
  std::vector<FuzzyEdge> edges;
};

// Local-scaling construction: rho_i is the distance to the nearest
// neighbor, sigma_i solves sum_j exp(-max(0, d_ij - rho_i)/sigma_i) =
// log2(k), and directed memberships are symmetrized with a + b - ab.
FuzzyGraph fuzzy_set(const KnnGraph& knn);

// Entrywise probabilistic sum a + b - ab over the union edge pattern.
FuzzyGraph union_graphs(const FuzzyGraph& a, const FuzzyGraph& b);

struct LayoutConfig {
  int n_neighbors = 15;
  double min_dist = 0.1;
  int epochs = 200;
  double learning_rate = 1.0;
  int negative_sample_rate = 5;
  std::uint64_t seed = 0;
  std::string metric_name;
};

struct EmbeddingAtlas {
  std::vector<std::array<double, 2>> coords;
  LayoutConfig config;
  double curve_a = 0.0;  // attraction/repulsion kernel 1/(1 + a d^{2b})
  double curve_b = 0.0;
};

// Least-squares fit of the kernel constants to the min_dist-shifted
// exponential target.
std::pair<double, double> fit_curve(double min_dist, double spread = 1.0);

// Stochastic layout of the fuzzy graph. `keys` gives one stable identifier
// per point (the canonical string); the result is independent of input
// order for a fixed key set and seed. Isolated points stay at their
// jittered initial placement.
EmbeddingAtlas layout(const FuzzyGraph& g, const std::vector<std::string>& keys,
                      const LayoutConfig& cfg);

// Fuzzy membership row of an out-of-sample point against the embedded
// table: k nearest by dist_to, local rho/sigma scaling. An exact match
// (distance zero) yields only the matching entries, each with weight 1.
std::vector<std::pair<std::uint32_t, double>> membership_row(
    const std::function<double(std::size_t)>& dist_to, std::size_t n, int k);

// Places a point with precomputed memberships: weighted mean of the
// referenced coordinates, then a short attraction-only refinement against
// the frozen atlas.
std::array<double, 2> place_by_memberships(
    const EmbeddingAtlas& atlas,
    const std::vector<std::pair<std::uint32_t, double>>& memberships,
    int refine_epochs = 30);

// Places a point unseen at fit time: membership-weighted mean of its k
// nearest embedded neighbors, then a short attraction-only refinement
// against the frozen atlas. dist_to(i) gives the feature-space distance to
// embedded point i. Throws if the atlas is empty.
std::array<double, 2> embed_new(const EmbeddingAtlas& atlas,
                                const std::function<double(std::size_t)>& dist_to,
                                int k, int refine_epochs = 30);

// Embedding quality: fraction-weighted penalty for low-dimensional
// neighbors that are not high-dimensional neighbors (1 = perfect).
double trustworthiness(std::size_t n, const Metric& highd,
                       const std::vector<std::array<double, 2>>& coords, int k);

}  // namespace aqs::embed
