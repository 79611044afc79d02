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

#include <cstdint>
#include <string>

namespace aqs::pipeline {

// Declarative run configuration. Parsed from `key = value` lines (# marks
// comments); every key is listed here and unknown keys are rejected. A
// resolved copy is written next to the outputs of every run.
struct RunConfig {
  std::string space = "three-node";    // three-node | four-node
  std::string task = "blobs";          // blobs | tiles | idx | csv
  std::string features = "both";       // outputs | spectra | both
  std::string algorithm = "knr";       // knr | random
  std::string init = "relu-plus-random";  // relu-plus-random | named-baselines
  std::string out_dir = "out";
  std::string data_images;             // idx task: image file
  std::string data_labels;             // idx task: label file
  std::string data_csv;                // csv task: data file

  std::uint64_t seed = 1;
  std::uint64_t probe_seed = 42;
  int sample = 200;    // unique-space sample size; 0 = full space
  int trials = 20;     // replay trials
  int budget = 100;    // evaluations per search
  int k = 3;           // KNR neighbors
  int batch_width = 1; // parallel evaluations per round
  int runs_per_fn = 3; // benchmark training runs per function
  int runs_per_eval = 1;  // live-search training runs per evaluation
  int workers = 0;     // 0: AQS_WORKERS env or hardware parallelism

  int fim_batch = 128;
  int mc_samples = 1;

  int epochs = 20;
  int batch_size = 128;
  double peak_lr = 0.1;
  double momentum = 0.9;
  int warmup_epochs = 3;
  int task_train = 2000;  // synthetic-task split sizes
  int task_val = 500;

  int n_neighbors_outputs = 15;
  int n_neighbors_spectra = 3;
  double min_dist = 0.1;
  int layout_epochs = 200;
  int negative_sample_rate = 5;
  int pool_threshold = 200;   // live search: spectra before search starts
  int producer_batch = 16;    // live search: spectra streamed per round

  void validate() const;  // throws std::invalid_argument
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

}  // namespace aqs::pipeline
