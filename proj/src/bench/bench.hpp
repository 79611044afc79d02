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

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kfac/kfac.hpp"
#include "search/search.hpp"
#include "tensornet/task.hpp"

namespace aqs::bench {

struct BenchHeader {
  std::string task;
  std::uint64_t net_digest = 0;
  tensornet::TrainConfig train;
  kfac::FimConfig fim;
  std::uint64_t probe_seed = 0;
  int runs_per_fn = 3;
  int num_classes = 0;
};

struct BenchRow {
  std::string canonical;
  double accuracy = 0.0;  // median over runs
  bool valid_spectrum = false;
  bool degenerate_spectrum = false;
  std::vector<double> runs;
};

class BenchmarkTable {
 public:
  BenchHeader header;

  const std::vector<BenchRow>& rows() const { return rows_; }
  const BenchRow* find(const std::string& canonical) const;
  bool contains(const std::string& canonical) const { return find(canonical); }
  void add_row(BenchRow row);
  std::size_t size() const { return rows_.size(); }
  double chance() const { return 1.0 / header.num_classes; }
  double max_accuracy() const;

 private:
  std::vector<BenchRow> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct BuildConfig {
  int runs_per_fn = 3;
  unsigned workers = 0;  // 0: AQS_WORKERS env or hardware
  std::uint64_t seed = 1;
  kfac::FimConfig fim;
};

// Trains every listed function runs_per_fn times and records the median
// accuracy plus the spectrum validity flags. Per-function failures are
// recorded at chance, never raised. Rows already present in `table` are
// kept untouched (resume); newly finished rows are streamed to `on_row`
// in input order. Per-function work is seeded independently, so results
// do not depend on the worker count.
void build_benchmark(const std::vector<std::string>& canonicals,
                     const tensornet::Task& task, const BuildConfig& cfg,
                     BenchmarkTable& table,
                     const std::function<void(const BenchRow&)>& on_row = {});

// Mean best-so-far curve with a 95% confidence band over replay trials.
struct AggregateCurve {
  std::string label;
  std::vector<double> mean;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  // reaches[i]: fraction of trials whose best-so-far at step i+1 is within
  // 0.005 of the table optimum
  std::vector<double> reach_optimum;
};

// Runs `cfg.trials` independent searches where evaluation is a table
// lookup; a missing row for a selected function is an error.
AggregateCurve replay(const std::string& algorithm, const BenchmarkTable& table,
                      const search::SearchSpace& space,
                      const search::SearchConfig& cfg);

struct ScatterPoint {
  std::string canonical;
  double acc_a = 0.0;
  double acc_b = 0.0;
};

struct ScatterResult {
  std::vector<ScatterPoint> points;
  double pearson = 0.0;
};

// Paired accuracies over the shared canonicals of two tables; errors when
// the intersection is empty.
ScatterResult cross_task_scatter(const BenchmarkTable& a, const BenchmarkTable& b);

}  // namespace aqs::bench
