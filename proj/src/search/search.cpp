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

#include "search/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "core/rng.hpp"

namespace aqs::search {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double sq_dist(std::array<double, 2> a, std::array<double, 2> b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

// Appends one evaluation to the trace, keeping best-so-far monotone.
void record(SearchTrace& trace, const std::string& canonical, double accuracy,
            double predicted) {
  TraceRow row;
  row.step = static_cast<int>(trace.rows.size()) + 1;
  row.canonical = canonical;
  row.accuracy = accuracy;
  row.predicted = predicted;
  row.best_so_far = trace.rows.empty()
                        ? accuracy
                        : std::fmax(trace.rows.back().best_so_far, accuracy);
  trace.rows.push_back(std::move(row));
}

// Removes a candidate by canonical; returns its coordinate if present.
std::optional<std::array<double, 2>> take_candidate(SurrogateState& state,
                                                    const std::string& canonical) {
  for (std::size_t i = 0; i < state.candidates.size(); ++i) {
    if (state.candidates[i].canonical == canonical) {
      auto coord = state.candidates[i].coord;
      state.candidates.erase(state.candidates.begin() + i);
      return coord;
    }
  }
  return std::nullopt;
}

}  // namespace

void SearchConfig::validate(std::size_t init_size) const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  // budget == |init| is the degenerate case: only the init set is evaluated
  if (budget < static_cast<int>(init_size))
    throw std::invalid_argument("budget must cover the init set");
  if (batch_width < 1) throw std::invalid_argument("batch_width must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
}

double knr_predict(const SurrogateState& state, std::array<double, 2> coord, int k) {
  if (state.evaluated.empty())
    throw std::invalid_argument("knr_predict requires at least one evaluation");
  k = std::min<int>(k, static_cast<int>(state.evaluated.size()));

  std::vector<std::pair<double, double>> by_dist;  // (squared distance, accuracy)
  by_dist.reserve(state.evaluated.size());
  for (const Evaluated& e : state.evaluated)
    by_dist.push_back({sq_dist(coord, e.coord), e.accuracy});
  std::partial_sort(by_dist.begin(), by_dist.begin() + k, by_dist.end());

  if (by_dist.front().first == 0.0) {
    double sum = 0.0;
    int count = 0;
    for (const auto& [d, acc] : by_dist) {
      if (d > 0.0) break;
      sum += acc;
      ++count;
    }
    return sum / count;
  }
  double wsum = 0.0, asum = 0.0;
  for (int i = 0; i < k; ++i) {
    const double w = 1.0 / std::sqrt(by_dist[i].first);
    wsum += w;
    asum += w * by_dist[i].second;
  }
  return asum / wsum;
}

std::vector<std::string> select_next(const SurrogateState& state, int k, int width) {
  std::vector<std::pair<double, const Candidate*>> scored;
  scored.reserve(state.candidates.size());
  for (const Candidate& c : state.candidates)
    scored.push_back({knr_predict(state, c.coord, k), &c});
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second->canonical < b.second->canonical;
            });
  std::vector<std::string> picks;
  for (int i = 0; i < width && i < static_cast<int>(scored.size()); ++i)
    picks.push_back(scored[i].second->canonical);
  return picks;
}

SearchTrace run_search(const SearchConfig& cfg, const Evaluator& evaluate,
                       const SearchSpace& space) {
  // assemble the init set
  std::vector<std::string> init;
  if (cfg.init == "named-baselines") {
    init = space.baselines;
    if (init.empty())
      throw std::invalid_argument("named-baselines init requires baseline canonicals");
  } else if (cfg.init == "relu-plus-random") {
    if (space.relu_canonical.empty())
      throw std::invalid_argument("relu-plus-random init requires the ReLU canonical");
    init.push_back(space.relu_canonical);
    std::vector<std::string> others;
    for (const Candidate& c : space.candidates)
      if (c.canonical != space.relu_canonical) others.push_back(c.canonical);
    core::Rng rng(core::derive_seed(cfg.seed, 0x1417));
    rng.shuffle(others);
    for (std::size_t i = 0; i < others.size() && init.size() < 8; ++i)
      init.push_back(others[i]);
  } else {
    throw std::invalid_argument("unknown init scheme '" + cfg.init + "'");
  }
  cfg.validate(init.size());

  SurrogateState state;
  state.candidates = space.candidates;

  SearchTrace trace;
  for (const std::string& canonical : init) {
    auto coord = take_candidate(state, canonical);
    if (!coord)
      throw std::invalid_argument("init function '" + canonical +
                                  "' is not in the candidate pool");
    const std::optional<double> acc = evaluate(canonical);
    const double accuracy = acc.value_or(space.chance);
    state.evaluated.push_back({canonical, *coord, accuracy});
    record(trace, canonical, accuracy, kNan);
  }

  while (static_cast<int>(trace.rows.size()) < cfg.budget &&
         !state.candidates.empty()) {
    const int width = std::min<int>(
        cfg.batch_width, cfg.budget - static_cast<int>(trace.rows.size()));
    const std::vector<std::string> picks = select_next(state, cfg.k, width);
    if (picks.empty()) break;
    for (const std::string& canonical : picks) {
      auto coord = take_candidate(state, canonical);
      const double predicted = knr_predict(state, *coord, cfg.k);
      const std::optional<double> acc = evaluate(canonical);
      const double accuracy = acc.value_or(space.chance);
      state.evaluated.push_back({canonical, *coord, accuracy});
      record(trace, canonical, accuracy, predicted);
    }
  }
  return trace;
}

SearchTrace random_search(const SearchConfig& cfg, const Evaluator& evaluate,
                          const SearchSpace& space) {
  std::vector<std::string> order = space.all_unique;
  core::Rng rng(core::derive_seed(cfg.seed, 0x7a43));
  rng.shuffle(order);
  SearchTrace trace;
  for (const std::string& canonical : order) {
    if (static_cast<int>(trace.rows.size()) >= cfg.budget) break;
    const std::optional<double> acc = evaluate(canonical);
    record(trace, canonical, acc.value_or(space.chance), kNan);
  }
  return trace;
}

}  // namespace aqs::search
