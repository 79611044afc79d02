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

#include "search/live.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "core/hash.hpp"
#include "core/rng.hpp"
#include "core/threadpool.hpp"
#include "features/features.hpp"
#include "tensornet/train.hpp"

namespace aqs::search {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct PoolEntry {
  std::string canonical;
  features::OutputFeature outputs;
  features::SpectralCdfFeature spectra;
};

// One spectrum-producer batch: computes validity and spectral features for
// the next candidates, in deterministic candidate order.
struct ProducerBatch {
  std::vector<PoolEntry> valid;
  std::vector<std::string> invalid;
};

class Producer {
 public:
  Producer(const tensornet::Task& task, std::vector<std::string> order,
           std::span<const double> probes, const kfac::FimConfig& fim,
           std::uint64_t seed, core::ThreadPool& pool)
      : task_(task),
        order_(std::move(order)),
        probes_(probes),
        fim_(fim),
        seed_(seed),
        pool_(pool) {}

  bool exhausted() const { return next_ >= order_.size(); }

  ProducerBatch produce(std::size_t count) {
    const std::size_t lo = next_;
    const std::size_t hi = std::min(order_.size(), lo + count);
    next_ = hi;
    std::vector<PoolEntry> entries(hi - lo);
    std::vector<bool> ok(hi - lo, false);
    pool_.parallel_for(hi - lo, [&](std::size_t t) {
      const std::string& canonical = order_[lo + t];
      const afdsl::ActivationGraph graph = afdsl::ActivationGraph::parse(canonical);
      kfac::FimConfig fim = fim_;
      fim.seed = core::derive_seed(seed_, core::fnv1a64(canonical));
      const kfac::SpectrumFeature sf = kfac::compute_spectrum(task_, graph, fim);
      if (!sf.valid) return;
      entries[t].canonical = canonical;
      entries[t].outputs = features::output_feature(graph, probes_);
      entries[t].spectra = features::spectral_cdf(sf);
      ok[t] = true;
    });
    ProducerBatch batch;
    for (std::size_t t = 0; t < entries.size(); ++t) {
      if (ok[t])
        batch.valid.push_back(std::move(entries[t]));
      else
        batch.invalid.push_back(order_[lo + t]);
    }
    return batch;
  }

 private:
  const tensornet::Task& task_;
  std::vector<std::string> order_;
  std::span<const double> probes_;
  kfac::FimConfig fim_;
  std::uint64_t seed_;
  core::ThreadPool& pool_;
  std::size_t next_ = 0;
};

}  // namespace

LiveResult live_search(const tensornet::Task& task,
                       const std::vector<std::string>& unique_canonicals,
                       const LiveConfig& cfg) {
  core::ThreadPool pool(core::resolve_workers(cfg.workers));
  const std::vector<double> probes = afdsl::make_probes(afdsl::kDefaultProbeSeed);

  // The baselines lead the candidate stream so the init set is in the pool
  // before the search starts; the rest is sampled uniformly.
  std::vector<std::string> order;
  std::unordered_set<std::string> seen;
  const char* named[] = {"unary_elu(x)",      "unary_relu(x)",    "unary_selu(x)",
                         "unary_sigmoid(x)",  "unary_softplus(x)", "unary_softsign(x)",
                         "unary_swish(x)",    "unary_tanh(x)"};
  std::unordered_set<std::string> unique_set(unique_canonicals.begin(),
                                             unique_canonicals.end());
  std::vector<std::string> baseline_reps;
  std::string relu_rep;
  for (const char* b : named) {
    // baselines are matched by value: map each to its unique representative
    const afdsl::ActivationGraph g = afdsl::ActivationGraph::parse(b);
    const std::vector<double> values = g.evaluate(probes);
    const std::uint64_t digest = core::digest_doubles(values);
    std::string rep;
    for (const std::string& u : unique_canonicals) {
      const afdsl::ActivationGraph cand = afdsl::ActivationGraph::parse(u);
      const std::vector<double> cv = cand.evaluate(probes);
      if (core::digest_doubles(cv) == digest && core::doubles_equal(cv, values)) {
        rep = u;
        break;
      }
    }
    if (rep.empty()) continue;
    if (std::string(b) == "unary_relu(x)") relu_rep = rep;
    baseline_reps.push_back(rep);
    if (seen.insert(rep).second) order.push_back(rep);
  }
  std::vector<std::string> rest;
  for (const std::string& u : unique_canonicals)
    if (!seen.count(u)) rest.push_back(u);
  core::Rng rng(core::derive_seed(cfg.base.seed, 0x9d0d));
  rng.shuffle(rest);
  order.insert(order.end(), rest.begin(), rest.end());

  Producer producer(task, std::move(order), probes, cfg.fim, cfg.base.seed, pool);

  LiveResult result;
  std::vector<PoolEntry> pool_entries;
  while (!producer.exhausted() &&
         pool_entries.size() < static_cast<std::size_t>(cfg.pool_threshold)) {
    ProducerBatch batch = producer.produce(cfg.producer_batch);
    for (auto& e : batch.valid) pool_entries.push_back(std::move(e));
    for (auto& c : batch.invalid) result.filtered.push_back(std::move(c));
  }
  if (pool_entries.size() < 2)
    throw std::runtime_error("candidate pool too small after filtering");

  // fit the atlas over the pool
  const bool use_outputs = cfg.feature_mode != "spectra";
  const bool use_spectra = cfg.feature_mode != "outputs";
  const auto out_metric = [&](std::size_t i, std::size_t j) {
    return features::dist_outputs(pool_entries[i].outputs.values,
                                  pool_entries[j].outputs.values);
  };
  const auto spec_metric = [&](std::size_t i, std::size_t j) {
    return features::dist_spectra(pool_entries[i].spectra, pool_entries[j].spectra);
  };
  std::vector<std::string> keys;
  for (const auto& e : pool_entries) keys.push_back(e.canonical);

  embed::FuzzyGraph graph;
  if (use_outputs) {
    graph = embed::fuzzy_set(embed::knn_graph(
        pool_entries.size(), out_metric,
        std::min<int>(cfg.outputs_layout.n_neighbors,
                      static_cast<int>(pool_entries.size()) - 1)));
  }
  if (use_spectra) {
    embed::FuzzyGraph sg = embed::fuzzy_set(embed::knn_graph(
        pool_entries.size(), spec_metric,
        std::min<int>(cfg.spectra_layout.n_neighbors,
                      static_cast<int>(pool_entries.size()) - 1)));
    graph = use_outputs ? embed::union_graphs(graph, sg) : std::move(sg);
  }
  embed::LayoutConfig lay = use_outputs ? cfg.outputs_layout : cfg.spectra_layout;
  lay.metric_name = cfg.feature_mode;
  result.atlas = embed::layout(graph, keys, lay);
  result.atlas_keys = keys;

  // surrogate state over the pool
  SurrogateState state;
  std::unordered_map<std::string, std::size_t> pool_index;
  for (std::size_t i = 0; i < pool_entries.size(); ++i) {
    pool_index[pool_entries[i].canonical] = i;
    state.candidates.push_back({pool_entries[i].canonical, result.atlas.coords[i]});
  }
  state.filtered = result.filtered;

  // init set
  std::vector<std::string> init;
  if (cfg.base.init == "named-baselines") {
    for (const std::string& b : baseline_reps)
      if (pool_index.count(b)) init.push_back(b);
    if (init.empty()) throw std::runtime_error("no baselines available in the pool");
  } else {
    if (relu_rep.empty() || !pool_index.count(relu_rep))
      throw std::runtime_error("ReLU representative missing from the pool");
    init.push_back(relu_rep);
    std::vector<std::string> others;
    for (const auto& c : state.candidates)
      if (c.canonical != relu_rep) others.push_back(c.canonical);
    core::Rng irng(core::derive_seed(cfg.base.seed, 0x1417));
    irng.shuffle(others);
    for (std::size_t i = 0; i < others.size() && init.size() < 8; ++i)
      init.push_back(others[i]);
  }
  cfg.base.validate(init.size());

  // evaluator: train runs_per_eval times, median accuracy, chance on failure
  const auto evaluate_one = [&](const std::string& canonical) {
    const afdsl::ActivationGraph graph = afdsl::ActivationGraph::parse(canonical);
    std::vector<double> runs;
    for (int r = 0; r < cfg.runs_per_eval; ++r) {
      const std::uint64_t s = core::derive_seed(
          cfg.base.seed, core::fnv1a64(canonical) + 0x9e37 * (r + 1));
      tensornet::Network net = tensornet::init_weights(task.net, graph, s);
      tensornet::TrainConfig tc = task.train_cfg;
      tc.seed = s;
      runs.push_back(tensornet::train(net, task.data, tc).best_val_accuracy);
    }
    std::sort(runs.begin(), runs.end());
    return runs.size() % 2 ? runs[runs.size() / 2]
                           : 0.5 * (runs[runs.size() / 2 - 1] + runs[runs.size() / 2]);
  };

  SearchTrace& trace = result.trace;
  auto record = [&](const std::string& canonical, double accuracy, double predicted) {
    TraceRow row;
    row.step = static_cast<int>(trace.rows.size()) + 1;
    row.canonical = canonical;
    row.accuracy = accuracy;
    row.predicted = predicted;
    row.best_so_far = trace.rows.empty()
                          ? accuracy
                          : std::fmax(trace.rows.back().best_so_far, accuracy);
    trace.rows.push_back(std::move(row));
  };
  auto take = [&](const std::string& canonical) {
    for (std::size_t i = 0; i < state.candidates.size(); ++i) {
      if (state.candidates[i].canonical == canonical) {
        auto coord = state.candidates[i].coord;
        state.candidates.erase(state.candidates.begin() + i);
        return coord;
      }
    }
    throw std::logic_error("candidate vanished: " + canonical);
  };

  // evaluate the init set (parallel, merged in order)
  {
    std::vector<double> accs(init.size());
    pool.parallel_for(init.size(),
                      [&](std::size_t i) { accs[i] = evaluate_one(init[i]); });
    for (std::size_t i = 0; i < init.size(); ++i) {
      auto coord = take(init[i]);
      state.evaluated.push_back({init[i], coord, accs[i]});
      record(init[i], accs[i], kNan);
    }
  }

  // rounds: pick top predictions, evaluate them while the producer streams
  // more candidates into the pool
  while (static_cast<int>(trace.rows.size()) < cfg.base.budget &&
         !state.candidates.empty()) {
    const int width = std::min<int>(
        cfg.base.batch_width, cfg.base.budget - static_cast<int>(trace.rows.size()));
    const std::vector<std::string> picks = select_next(state, cfg.base.k, width);
    if (picks.empty()) break;

    ProducerBatch batch;
    std::vector<double> accs(picks.size());
    pool.submit([&] {
      if (!producer.exhausted()) batch = producer.produce(cfg.producer_batch);
    });
    for (std::size_t i = 0; i < picks.size(); ++i)
      pool.submit([&, i] { accs[i] = evaluate_one(picks[i]); });
    pool.wait();

    for (std::size_t i = 0; i < picks.size(); ++i) {
      auto coord = take(picks[i]);
      const double predicted = knr_predict(state, coord, cfg.base.k);
      state.evaluated.push_back({picks[i], coord, accs[i]});
      record(picks[i], accs[i], predicted);
    }

    // stragglers are placed against the frozen atlas
    for (auto& e : batch.valid) {
      std::vector<std::pair<std::uint32_t, double>> row;
      const int k_out = std::min<int>(cfg.outputs_layout.n_neighbors,
                                      static_cast<int>(pool_entries.size()) - 1);
      const int k_spec = std::min<int>(cfg.spectra_layout.n_neighbors,
                                       static_cast<int>(pool_entries.size()) - 1);
      if (use_outputs) {
        row = embed::membership_row(
            [&](std::size_t i) {
              return features::dist_outputs(e.outputs.values,
                                            pool_entries[i].outputs.values);
            },
            pool_entries.size(), k_out);
      }
      if (use_spectra) {
        auto srow = embed::membership_row(
            [&](std::size_t i) {
              return features::dist_spectra(e.spectra, pool_entries[i].spectra);
            },
            pool_entries.size(), k_spec);
        // probabilistic sum over the union of the two rows
        std::unordered_map<std::uint32_t, double> merged;
        for (const auto& [idx, w] : row) merged[idx] = w;
        for (const auto& [idx, w] : srow) {
          auto [it, fresh] = merged.try_emplace(idx, w);
          if (!fresh) it->second = it->second + w - it->second * w;
        }
        row.assign(merged.begin(), merged.end());
        std::sort(row.begin(), row.end());
      }
      const auto coord = embed::place_by_memberships(result.atlas, row);
      state.candidates.push_back({e.canonical, coord});
    }
    for (auto& c : batch.invalid) {
      result.filtered.push_back(c);
      state.filtered.push_back(c);
    }
  }

  result.pool_size = state.candidates.size() + state.evaluated.size();
  return result;
}

}  // namespace aqs::search
