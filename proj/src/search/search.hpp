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
#include <optional>
#include <string>
#include <vector>

namespace aqs::search {

struct Candidate {
  std::string canonical;
  std::array<double, 2> coord = {0.0, 0.0};
};

struct Evaluated {
  std::string canonical;
  std::array<double, 2> coord = {0.0, 0.0};
  double accuracy = 0.0;
};

// Evaluated functions plus the still-unevaluated candidate pool. Functions
// excluded for invalid spectra are listed in `filtered` and never enter
// `candidates`.
struct SurrogateState {
  std::vector<Evaluated> evaluated;
  std::vector<Candidate> candidates;
  std::vector<std::string> filtered;
};

// Inverse-distance-weighted mean of the k nearest evaluated accuracies;
// exact matches (distance zero) return the mean of the matching accuracies.
double knr_predict(const SurrogateState& state, std::array<double, 2> coord, int k);

// Top `width` candidates by predicted accuracy; ties break toward the
// lexicographically smaller canonical string.
std::vector<std::string> select_next(const SurrogateState& state, int k, int width);

struct SearchConfig {
  int k = 3;
  int budget = 100;
  std::string init = "relu-plus-random";  // or "named-baselines"
  int batch_width = 1;
  int trials = 1;
  std::uint64_t seed = 0;

  void validate(std::size_t init_size) const;
};

// Accuracy oracle; nullopt marks an evaluation failure (recorded at chance).
using Evaluator = std::function<std::optional<double>(const std::string&)>;

struct SearchSpace {
  std::vector<Candidate> candidates;       // embeddable (valid-spectrum) pool
  std::vector<std::string> all_unique;     // full unique set, unfiltered
  std::vector<std::string> baselines;      // canonicals for named-baselines init
  std::string relu_canonical;              // representative of ReLU
  double chance = 0.25;
};

struct TraceRow {
  int step = 0;
  std::string canonical;
  double accuracy = 0.0;
  double predicted = 0.0;  // NaN when no prediction was made (init, random)
  double best_so_far = 0.0;
};

struct SearchTrace {
  std::vector<TraceRow> rows;
};

// Evaluates the init set, then loops predict -> select -> evaluate until the
// budget is reached or candidates run out. No function is evaluated twice.
SearchTrace run_search(const SearchConfig& cfg, const Evaluator& evaluate,
                       const SearchSpace& space);

// Uniform sampling without replacement from the full unique set.
SearchTrace random_search(const SearchConfig& cfg, const Evaluator& evaluate,
                          const SearchSpace& space);

}  // namespace aqs::search
