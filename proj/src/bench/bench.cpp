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

#include "bench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "afdsl/fingerprint.hpp"
#include "core/hash.hpp"
#include "core/rng.hpp"
#include "core/threadpool.hpp"

namespace aqs::bench {

const BenchRow* BenchmarkTable::find(const std::string& canonical) const {
  auto it = index_.find(canonical);
  return it == index_.end() ? nullptr : &rows_[it->second];
}

void BenchmarkTable::add_row(BenchRow row) {
  auto [it, inserted] = index_.try_emplace(row.canonical, rows_.size());
  if (!inserted) {
    rows_[it->second] = std::move(row);  // idempotent merge by canonical key
    return;
  }
  rows_.push_back(std::move(row));
}

double BenchmarkTable::max_accuracy() const {
  double best = 0.0;
  for (const BenchRow& r : rows_) best = std::fmax(best, r.accuracy);
  return best;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void build_benchmark(const std::vector<std::string>& canonicals,
                     const tensornet::Task& task, const BuildConfig& cfg,
                     BenchmarkTable& table,
                     const std::function<void(const BenchRow&)>& on_row) {
  table.header.task = task.name;
  table.header.net_digest = task.net.digest();
  table.header.train = task.train_cfg;
  table.header.fim = cfg.fim;
  table.header.probe_seed = afdsl::kDefaultProbeSeed;
  table.header.runs_per_fn = cfg.runs_per_fn;
  table.header.num_classes = task.data.num_classes;

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < canonicals.size(); ++i)
    if (!table.contains(canonicals[i])) todo.push_back(i);

  std::vector<BenchRow> done(todo.size());
  core::ThreadPool pool(core::resolve_workers(cfg.workers));
  pool.parallel_for(todo.size(), [&](std::size_t t) {
    const std::string& canonical = canonicals[todo[t]];
    const afdsl::ActivationGraph graph = afdsl::ActivationGraph::parse(canonical);
    BenchRow row;
    row.canonical = canonical;

    kfac::FimConfig fim = cfg.fim;
    fim.seed = core::derive_seed(cfg.seed, core::fnv1a64(canonical));
    const kfac::SpectrumFeature sf = kfac::compute_spectrum(task, graph, fim);
    row.valid_spectrum = sf.valid;
    row.degenerate_spectrum = sf.degenerate;

    for (int run = 0; run < cfg.runs_per_fn; ++run) {
      const std::uint64_t s =
          core::derive_seed(cfg.seed, core::fnv1a64(canonical) + 0x9e37 * (run + 1));
      tensornet::Network net = tensornet::init_weights(task.net, graph, s);
      tensornet::TrainConfig train_cfg = task.train_cfg;
      train_cfg.seed = s;
      row.runs.push_back(
          tensornet::train(net, task.data, train_cfg).best_val_accuracy);
    }
    row.accuracy = median(row.runs);
    done[t] = std::move(row);
  });

  for (BenchRow& row : done) {
    if (on_row) on_row(row);
    table.add_row(std::move(row));
  }
}

AggregateCurve replay(const std::string& algorithm, const BenchmarkTable& table,
                      const search::SearchSpace& space,
                      const search::SearchConfig& cfg) {
  const search::Evaluator lookup = [&](const std::string& canonical) {
    const BenchRow* row = table.find(canonical);
    if (!row)
      throw std::runtime_error("benchmark table has no row for '" + canonical + "'");
    return std::optional<double>(row->accuracy);
  };

  AggregateCurve curve;
  curve.label = algorithm;
  const double optimum = table.max_accuracy();
  std::vector<std::vector<double>> best(cfg.trials);
  int steps = cfg.budget;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    search::SearchConfig trial_cfg = cfg;
    trial_cfg.seed = core::derive_seed(cfg.seed, trial);
    search::SearchTrace trace =
        algorithm == "random" ? search::random_search(trial_cfg, lookup, space)
                              : search::run_search(trial_cfg, lookup, space);
    best[trial].reserve(cfg.budget);
    for (const auto& row : trace.rows) best[trial].push_back(row.best_so_far);
    // searches that exhaust the pool early hold their final best
    while (static_cast<int>(best[trial].size()) < cfg.budget)
      best[trial].push_back(best[trial].empty() ? table.chance()
                                                : best[trial].back());
  }

  for (int s = 0; s < steps; ++s) {
    double mean = 0.0;
    for (int t = 0; t < cfg.trials; ++t) mean += best[t][s];
    mean /= cfg.trials;
    double var = 0.0;
    int reached = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      var += (best[t][s] - mean) * (best[t][s] - mean);
      if (best[t][s] >= optimum - 0.005) ++reached;
    }
    const double se =
        cfg.trials > 1 ? std::sqrt(var / (cfg.trials - 1)) / std::sqrt(cfg.trials)
                       : 0.0;
    curve.mean.push_back(mean);
    curve.ci_lo.push_back(mean - 1.96 * se);
    curve.ci_hi.push_back(mean + 1.96 * se);
    curve.reach_optimum.push_back(static_cast<double>(reached) / cfg.trials);
  }
  return curve;
}

ScatterResult cross_task_scatter(const BenchmarkTable& a, const BenchmarkTable& b) {
  ScatterResult out;
  for (const BenchRow& row : a.rows()) {
    const BenchRow* other = b.find(row.canonical);
    if (other) out.points.push_back({row.canonical, row.accuracy, other->accuracy});
  }
  if (out.points.empty())
    throw std::runtime_error("benchmark tables share no functions");

  double ma = 0.0, mb = 0.0;
  for (const auto& p : out.points) {
    ma += p.acc_a;
    mb += p.acc_b;
  }
  ma /= out.points.size();
  mb /= out.points.size();
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (const auto& p : out.points) {
    cov += (p.acc_a - ma) * (p.acc_b - mb);
    va += (p.acc_a - ma) * (p.acc_a - ma);
    vb += (p.acc_b - mb) * (p.acc_b - mb);
  }
  out.pearson = (va > 0 && vb > 0) ? cov / std::sqrt(va * vb) : 0.0;
  return out;
}

}  // namespace aqs::bench
