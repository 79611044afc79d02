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

#include "embed/embed.hpp"
#include "kfac/kfac.hpp"
#include "search/search.hpp"
#include "tensornet/task.hpp"

namespace aqs::search {

// The streaming evaluation protocol: a spectrum producer samples candidates
// and computes validity/features into the candidate pool; once the pool
// reaches `pool_threshold` the atlas is fitted and evaluator workers train
// the top-predicted functions, while the producer keeps streaming new
// candidates that are placed into the frozen atlas. The coordinator applies
// results in deterministic round order, so traces do not depend on the
// worker count.
struct LiveConfig {
  SearchConfig base;
  std::string feature_mode = "both";  // outputs | spectra | both
  int pool_threshold = 200;
  int producer_batch = 16;
  int runs_per_eval = 1;
  unsigned workers = 0;
  kfac::FimConfig fim;
  embed::LayoutConfig outputs_layout;  // defaults set by live_search
  embed::LayoutConfig spectra_layout;
};

struct LiveResult {
  SearchTrace trace;
  std::vector<std::string> filtered;  // invalid-spectrum functions seen
  std::size_t pool_size = 0;          // candidates with features at the end
  embed::EmbeddingAtlas atlas;        // pool atlas (fit once, then frozen)
  std::vector<std::string> atlas_keys;
};

LiveResult live_search(const tensornet::Task& task,
                       const std::vector<std::string>& unique_canonicals,
                       const LiveConfig& cfg);

}  // namespace aqs::search
