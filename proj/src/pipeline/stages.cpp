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

#include "pipeline/stages.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_map>
#include <unordered_set>

#include "core/hash.hpp"
#include "core/rng.hpp"
#include "core/threadpool.hpp"
#include "features/features.hpp"
#include "pipeline/plots.hpp"
#include "search/live.hpp"

namespace aqs::pipeline {

namespace {

const char* kNamedBaselines[] = {
    "unary_elu(x)",      "unary_relu(x)",     "unary_selu(x)",
    "unary_sigmoid(x)",  "unary_softplus(x)", "unary_softsign(x)",
    "unary_swish(x)",    "unary_tanh(x)"};

// Maps a function (by value over the probes) to its representative among
// `canonicals`; empty when absent.
std::string representative_of(const std::string& fn,
                              const std::vector<std::string>& canonicals,
                              std::span<const double> probes) {
  const afdsl::ActivationGraph g = afdsl::ActivationGraph::parse(fn);
  const std::vector<double> values = g.evaluate(probes);
  const std::uint64_t digest = core::digest_doubles(values);
  for (const std::string& c : canonicals) {
    const std::vector<double> cv = afdsl::ActivationGraph::parse(c).evaluate(probes);
    if (core::digest_doubles(cv) == digest && core::doubles_equal(cv, values))
      return c;
  }
  return {};
}

embed::LayoutConfig layout_config(const RunConfig& cfg, const std::string& mode) {
  embed::LayoutConfig lay;
  lay.n_neighbors =
      mode == "spectra" ? cfg.n_neighbors_spectra : cfg.n_neighbors_outputs;
  lay.min_dist = cfg.min_dist;
  lay.epochs = cfg.layout_epochs;
  lay.negative_sample_rate = cfg.negative_sample_rate;
  lay.seed = cfg.seed;
  lay.metric_name = mode;
  return lay;
}

}  // namespace

tensornet::Task task_from_config(const RunConfig& cfg) {
  tensornet::Task task;
  if (cfg.task == "blobs") {
    task.name = "blobs";
    task.data = tensornet::make_blobs(cfg.seed, cfg.task_train, cfg.task_val);
    task.net = tensornet::make_task("blobs", cfg.seed).net;
  } else if (cfg.task == "tiles") {
    task = tensornet::make_task("tiles", cfg.seed);
    task.data = tensornet::make_tiles(cfg.seed, cfg.task_train, cfg.task_val);
  } else if (cfg.task == "idx") {
    task = tensornet::make_image_task(
        "idx", tensornet::load_idx(cfg.data_images, cfg.data_labels, cfg.task_train,
                                   cfg.task_val));
  } else if (cfg.task == "csv") {
    task = tensornet::make_image_task(
        "csv", tensornet::load_csv(cfg.data_csv, cfg.task_train, cfg.task_val));
  } else {
    throw std::invalid_argument("unknown task '" + cfg.task + "'");
  }
  task.train_cfg.epochs = cfg.epochs;
  task.train_cfg.batch_size = cfg.batch_size;
  task.train_cfg.momentum = cfg.momentum;
  task.train_cfg.peak_lr = cfg.peak_lr;
  task.train_cfg.warmup_epochs = cfg.warmup_epochs;
  task.train_cfg.seed = cfg.seed;
  return task;
}

std::uint64_t stage_enumerate(const std::string& space, const std::string& out_path) {
  const auto id = afdsl::space_from_name(space);
  if (!id) throw std::invalid_argument("unknown space '" + space + "'");
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  std::uint64_t count = 0;
  afdsl::enumerate_space(*id, [&](std::uint64_t, const afdsl::ActivationGraph& g) {
    out << g.render() << "\n";
    ++count;
    return true;
  });
  return count;
}

void stage_dedup(const RunConfig& cfg, const std::string& out_path) {
  const auto id = afdsl::space_from_name(cfg.space);
  if (!id) throw std::invalid_argument("unknown space '" + cfg.space + "'");
  afdsl::UniqueTable table =
      afdsl::dedup_space(*id, afdsl::make_probes(cfg.probe_seed));

  UniqueFileHeader header;
  header.space = cfg.space;
  header.probe_seed = cfg.probe_seed;
  header.n_probes = afdsl::kNumProbes;
  header.total = afdsl::space_size(*id);
  header.unique_full = table.size();
  header.seed = cfg.seed;

  std::vector<std::size_t> keep;
  if (cfg.sample > 0 && static_cast<std::size_t>(cfg.sample) < table.size()) {
    header.sample = cfg.sample;
    std::vector<std::size_t> order(table.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    core::Rng rng(core::derive_seed(cfg.seed, 0x5a3d));
    rng.shuffle(order);
    keep.assign(order.begin(), order.begin() + cfg.sample);
    // the desk sample always carries the baseline functions so searches
    // can start from them
    for (const char* fn : kNamedBaselines) {
      const afdsl::ActivationGraph g = afdsl::ActivationGraph::parse(fn);
      if (auto idx = table.find_graph(g)) {
        if (std::find(keep.begin(), keep.end(), *idx) == keep.end())
          keep.push_back(*idx);
      }
    }
    std::sort(keep.begin(), keep.end());
  } else {
    keep.resize(table.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  }

  std::vector<UniqueFileRow> rows;
  rows.reserve(keep.size());
  for (std::size_t idx : keep) {
    const afdsl::UniqueEntry& e = table.entries()[idx];
    rows.push_back({e.canonical, e.digest, e.first_index});
  }
  write_unique(out_path, header, rows);
}

void stage_features(const std::string& unique_path, const std::string& out_path) {
  auto [header, unique_rows] = load_unique(unique_path);
  const std::vector<double> probes =
      afdsl::make_probes(header.probe_seed, header.n_probes);
  std::vector<OutputsFileRow> rows;
  rows.reserve(unique_rows.size());
  for (const auto& u : unique_rows) {
    const afdsl::ActivationGraph g = afdsl::ActivationGraph::parse(u.canonical);
    rows.push_back({u.canonical, g.evaluate(probes)});
  }
  write_outputs(out_path, header.probe_seed, rows);
}

void stage_spectra(const RunConfig& cfg, const std::string& unique_path,
                   const std::string& out_path) {
  auto [uheader, unique_rows] = load_unique(unique_path);
  const tensornet::Task task = task_from_config(cfg);

  SpectraFileHeader header;
  header.task = task.name;
  header.net_digest = task.net.digest();
  header.fim_batch = cfg.fim_batch;
  header.mc_samples = cfg.mc_samples;
  header.seed = cfg.seed;

  std::vector<SpectraFileRow> rows(unique_rows.size());
  core::ThreadPool pool(core::resolve_workers(cfg.workers));
  pool.parallel_for(unique_rows.size(), [&](std::size_t i) {
    const std::string& canonical = unique_rows[i].canonical;
    kfac::FimConfig fim;
    fim.batch = cfg.fim_batch;
    fim.mc_samples = cfg.mc_samples;
    fim.seed = core::derive_seed(cfg.seed, core::fnv1a64(canonical));
    const kfac::SpectrumFeature sf =
        kfac::compute_spectrum(task, afdsl::ActivationGraph::parse(canonical), fim);
    rows[i].canonical = canonical;
    rows[i].valid = sf.valid;
    rows[i].degenerate = sf.degenerate;
    if (sf.valid) {
      for (const auto& l : sf.layers) {
        kfac::LayerSpectrum slim;
        slim.w = l.w;
        slim.bins = l.bins;
        slim.counts = l.counts;
        rows[i].layers.push_back(std::move(slim));
      }
    }
  });
  write_spectra(out_path, header, rows);
}

void stage_embed(const RunConfig& cfg, const std::string& outputs_path,
                 const std::string& spectra_path, const std::string& mode,
                 const std::string& atlas_path, const std::string& csv_path) {
  if (mode != "outputs" && mode != "spectra" && mode != "both")
    throw std::invalid_argument("embed mode must be outputs|spectra|both");
  if (mode != "outputs" && spectra_path.empty())
    throw std::invalid_argument("embed mode '" + mode + "' needs a spectra table");

  auto [probe_seed, output_rows] = load_outputs(outputs_path);
  std::unordered_map<std::string, const OutputsFileRow*> outputs_by_name;
  for (const auto& r : output_rows) outputs_by_name[r.canonical] = &r;

  // valid-spectrum filter plus spectral CDF features
  std::vector<std::string> keys;
  std::vector<const OutputsFileRow*> outputs;
  std::vector<features::SpectralCdfFeature> cdfs;
  if (!spectra_path.empty()) {
    auto [sheader, spectra_rows] = load_spectra(spectra_path);
    for (const auto& s : spectra_rows) {
      if (!s.valid) continue;
      auto it = outputs_by_name.find(s.canonical);
      if (it == outputs_by_name.end()) continue;
      kfac::SpectrumFeature sf;
      sf.valid = true;
      sf.layers = s.layers;
      keys.push_back(s.canonical);
      outputs.push_back(it->second);
      cdfs.push_back(features::spectral_cdf(sf));
    }
  } else {
    // without a validity table, functions with non-finite outputs cannot be
    // given meaningful distances; drop them
    for (const auto& r : output_rows) {
      bool finite = true;
      for (double v : r.values) finite = finite && std::isfinite(v);
      if (!finite) continue;
      keys.push_back(r.canonical);
      outputs.push_back(&r);
    }
  }
  if (keys.size() < 3)
    throw std::runtime_error("not enough embeddable functions after filtering");

  const auto out_metric = [&](std::size_t i, std::size_t j) {
    return features::dist_outputs(outputs[i]->values, outputs[j]->values);
  };
  const auto spec_metric = [&](std::size_t i, std::size_t j) {
    return features::dist_spectra(cdfs[i], cdfs[j]);
  };

  embed::FuzzyGraph graph;
  if (mode != "spectra") {
    const int k = std::min<int>(cfg.n_neighbors_outputs,
                                static_cast<int>(keys.size()) - 1);
    graph = embed::fuzzy_set(embed::knn_graph(keys.size(), out_metric, k));
  }
  if (mode != "outputs") {
    const int k = std::min<int>(cfg.n_neighbors_spectra,
                                static_cast<int>(keys.size()) - 1);
    embed::FuzzyGraph sg = embed::fuzzy_set(embed::knn_graph(keys.size(), spec_metric, k));
    graph = mode == "both" ? embed::union_graphs(graph, sg) : std::move(sg);
  }

  embed::EmbeddingAtlas atlas = embed::layout(graph, keys, layout_config(cfg, mode));

  std::vector<AtlasFileRow> rows;
  rows.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    rows.push_back({keys[i], atlas.coords[i][0], atlas.coords[i][1]});
  write_atlas(atlas_path, atlas.config, atlas.curve_a, atlas.curve_b, rows);
  if (!csv_path.empty()) export_atlas_csv(csv_path, rows);
}

void stage_bench(const RunConfig& cfg, const std::string& unique_path,
                 const std::string& bench_path) {
  auto [header, unique_rows] = load_unique(unique_path);
  std::vector<std::string> canonicals;
  for (const auto& r : unique_rows) canonicals.push_back(r.canonical);

  const tensornet::Task task = task_from_config(cfg);
  bench::BenchmarkTable table;
  const bool resume = file_exists(bench_path);
  if (resume) table = load_bench(bench_path);

  bench::BuildConfig build;
  build.runs_per_fn = cfg.runs_per_fn;
  build.workers = cfg.workers;
  build.seed = cfg.seed;
  build.fim.batch = cfg.fim_batch;
  build.fim.mc_samples = cfg.mc_samples;

  std::vector<bench::BenchRow> fresh_rows;
  build_benchmark(canonicals, task, build, table,
                  [&](const bench::BenchRow& row) { fresh_rows.push_back(row); });
  append_bench_rows(bench_path, table.header, fresh_rows, /*fresh=*/!resume);
}

namespace {

search::SearchSpace space_for_replay(const bench::BenchmarkTable& table,
                                     const std::vector<AtlasFileRow>& atlas_rows,
                                     std::uint64_t probe_seed) {
  search::SearchSpace space;
  space.chance = table.chance();
  for (const auto& row : table.rows()) space.all_unique.push_back(row.canonical);
  std::vector<std::string> pool;
  for (const auto& r : atlas_rows) {
    if (!table.contains(r.canonical)) continue;
    space.candidates.push_back({r.canonical, {r.x, r.y}});
    pool.push_back(r.canonical);
  }
  const std::vector<double> probes = afdsl::make_probes(probe_seed);
  space.relu_canonical = representative_of("unary_relu(x)", pool, probes);
  for (const char* fn : kNamedBaselines) {
    const std::string rep = representative_of(fn, pool, probes);
    if (!rep.empty()) space.baselines.push_back(rep);
  }
  return space;
}

}  // namespace

void stage_replay(const RunConfig& cfg, const std::string& bench_path,
                  const std::vector<std::pair<std::string, std::string>>& configs,
                  const std::string& curves_path, const std::string& trace_path) {
  const bench::BenchmarkTable table = load_bench(bench_path);
  std::vector<bench::AggregateCurve> curves;
  std::optional<search::SearchTrace> primary_trace;

  for (const auto& [label, atlas_path] : configs) {
    search::SearchConfig scfg;
    scfg.k = cfg.k;
    scfg.budget = cfg.budget;
    scfg.init = cfg.init;
    scfg.batch_width = cfg.batch_width;
    scfg.trials = cfg.trials;
    scfg.seed = cfg.seed;

    if (atlas_path.empty()) {
      search::SearchSpace space = space_for_replay(table, {}, table.header.probe_seed);
      curves.push_back(bench::replay("random", table, space, scfg));
      if (!primary_trace && cfg.algorithm == "random") {
        search::SearchConfig one = scfg;
        one.seed = core::derive_seed(scfg.seed, 0);
        const search::Evaluator lookup = [&](const std::string& c) {
          return std::optional<double>(table.find(c)->accuracy);
        };
        primary_trace = search::random_search(one, lookup, space);
      }
      continue;
    }

    auto [acfg, atlas_rows] = load_atlas(atlas_path);
    search::SearchSpace space =
        space_for_replay(table, atlas_rows, table.header.probe_seed);
    if (space.relu_canonical.empty() && cfg.init == "relu-plus-random")
      throw std::runtime_error("replay: ReLU representative missing from " + atlas_path);
    curves.push_back(bench::replay(label, table, space, scfg));
    if (!primary_trace && cfg.algorithm == "knr" && label.find(cfg.features) != std::string::npos) {
      search::SearchConfig one = scfg;
      one.seed = core::derive_seed(scfg.seed, 0);
      const search::Evaluator lookup = [&](const std::string& c) {
        const bench::BenchRow* row = table.find(c);
        if (!row) throw std::runtime_error("missing row " + c);
        return std::optional<double>(row->accuracy);
      };
      primary_trace = search::run_search(one, lookup, space);
    }
  }
  write_curves_csv(curves_path, curves);
  if (primary_trace && !trace_path.empty()) write_trace_csv(trace_path, *primary_trace);
}

void stage_search(const RunConfig& cfg, const std::string& unique_path,
                  const std::string& trace_path, const std::string& atlas_path) {
  auto [header, unique_rows] = load_unique(unique_path);
  std::vector<std::string> canonicals;
  for (const auto& r : unique_rows) canonicals.push_back(r.canonical);
  const tensornet::Task task = task_from_config(cfg);

  search::LiveConfig live;
  live.base.k = cfg.k;
  live.base.budget = cfg.budget;
  live.base.init = cfg.init;
  live.base.batch_width = cfg.batch_width;
  live.base.seed = cfg.seed;
  live.feature_mode = cfg.features;
  live.pool_threshold = cfg.pool_threshold;
  live.producer_batch = cfg.producer_batch;
  live.runs_per_eval = cfg.runs_per_eval;
  live.workers = cfg.workers;
  live.fim.batch = cfg.fim_batch;
  live.fim.mc_samples = cfg.mc_samples;
  live.outputs_layout = layout_config(cfg, "outputs");
  live.spectra_layout = layout_config(cfg, "spectra");

  search::LiveResult result = search::live_search(task, canonicals, live);
  write_trace_csv(trace_path, result.trace);
  if (!atlas_path.empty()) {
    std::vector<AtlasFileRow> rows;
    for (std::size_t i = 0; i < result.atlas_keys.size(); ++i)
      rows.push_back({result.atlas_keys[i], result.atlas.coords[i][0],
                      result.atlas.coords[i][1]});
    write_atlas(atlas_path, result.atlas.config, result.atlas.curve_a,
                result.atlas.curve_b, rows);
  }
  std::cerr << "live search: " << result.trace.rows.size() << " evaluations, pool "
            << result.pool_size << ", filtered " << result.filtered.size()
            << ", best " << (result.trace.rows.empty()
                                 ? 0.0
                                 : result.trace.rows.back().best_so_far)
            << "\n";
}

double stage_scatter(const std::string& bench_a, const std::string& bench_b,
                     const std::string& out_csv) {
  const bench::BenchmarkTable a = load_bench(bench_a);
  const bench::BenchmarkTable b = load_bench(bench_b);
  const bench::ScatterResult scatter = bench::cross_task_scatter(a, b);
  write_scatter_csv(out_csv, scatter);
  return scatter.pearson;
}

void stage_plot(const std::string& atlas_path, const std::string& bench_path,
                const std::string& curves_path, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  bool wrote = false;
  if (!atlas_path.empty()) {
    auto [acfg, atlas_rows] = load_atlas(atlas_path);
    std::optional<bench::BenchmarkTable> table;
    if (!bench_path.empty()) table = load_bench(bench_path);
    const std::string svg = scatter_svg(
        atlas_rows, table ? &*table : nullptr,
        "embedding (" + acfg.metric_name + "), colored by validation accuracy");
    std::ofstream out(fs::path(out_dir) / "scatter.svg");
    out << svg;
    wrote = true;
  }
  if (!curves_path.empty()) {
    const auto curves = load_curves_csv(curves_path);
    const std::string svg = curves_svg(curves, "best accuracy found so far");
    std::ofstream out(fs::path(out_dir) / "curves.svg");
    out << svg;
    wrote = true;
  }
  if (!wrote) throw std::invalid_argument("plot: no inputs given");
}

void run_pipeline(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const auto path = [&](const char* name) {
    return (fs::path(cfg.out_dir) / name).string();
  };
  {
    std::ofstream out(path("config.resolved"));
    out << serialize_config(cfg);
  }

  auto step = [&](const char* name, const std::vector<std::string>& outputs,
                  const std::function<void()>& fn) {
    bool all_exist = true;
    for (const auto& o : outputs) all_exist = all_exist && file_exists(o);
    if (all_exist) {
      std::cerr << "pipeline: " << name << " exists, skipping\n";
      return;
    }
    try {
      fn();
    } catch (const std::exception& e) {
      throw std::runtime_error("stage " + std::string(name) + ": " + e.what());
    }
    std::cerr << "pipeline: " << name << " done\n";
  };

  step("dedup", {path("unique.jsonl")},
       [&] { stage_dedup(cfg, path("unique.jsonl")); });
  step("features", {path("outputs.jsonl")},
       [&] { stage_features(path("unique.jsonl"), path("outputs.jsonl")); });
  step("spectra", {path("spectra.jsonl")},
       [&] { stage_spectra(cfg, path("unique.jsonl"), path("spectra.jsonl")); });
  step("embed", {path("atlas_outputs.jsonl"), path("atlas_spectra.jsonl"),
                 path("atlas_both.jsonl")},
       [&] {
         stage_embed(cfg, path("outputs.jsonl"), path("spectra.jsonl"), "outputs",
                     path("atlas_outputs.jsonl"), path("atlas_outputs.csv"));
         stage_embed(cfg, path("outputs.jsonl"), path("spectra.jsonl"), "spectra",
                     path("atlas_spectra.jsonl"), path("atlas_spectra.csv"));
         stage_embed(cfg, path("outputs.jsonl"), path("spectra.jsonl"), "both",
                     path("atlas_both.jsonl"), path("atlas_both.csv"));
       });
  step("bench", {path("bench.jsonl")},
       [&] { stage_bench(cfg, path("unique.jsonl"), path("bench.jsonl")); });
  step("replay", {path("curves.csv"), path("trace.csv")}, [&] {
    stage_replay(cfg, path("bench.jsonl"),
                 {{"knr-outputs", path("atlas_outputs.jsonl")},
                  {"knr-spectra", path("atlas_spectra.jsonl")},
                  {"knr-both", path("atlas_both.jsonl")},
                  {"random", ""}},
                 path("curves.csv"), path("trace.csv"));
  });
  step("plot", {path("curves.svg"), path("scatter.svg")}, [&] {
    stage_plot(path("atlas_both.jsonl"), path("bench.jsonl"), path("curves.csv"),
               cfg.out_dir);
  });
}

}  // namespace aqs::pipeline
