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

#include <string>
#include <vector>

#include "pipeline/artifacts.hpp"
#include "pipeline/config.hpp"
#include "tensornet/task.hpp"

namespace aqs::pipeline {

// Stages are file-to-file transforms; each validates its inputs, writes its
// outputs atomically at the end and throws on failure. `pipeline` chains
// them with resume-by-existence semantics.

std::uint64_t stage_enumerate(const std::string& space, const std::string& out_path);

void stage_dedup(const RunConfig& cfg, const std::string& out_path);

void stage_features(const std::string& unique_path, const std::string& out_path);

void stage_spectra(const RunConfig& cfg, const std::string& unique_path,
                   const std::string& out_path);

// mode: outputs | spectra | both. spectra_path may be empty only for the
// outputs mode (then nothing is filtered).
void stage_embed(const RunConfig& cfg, const std::string& outputs_path,
                 const std::string& spectra_path, const std::string& mode,
                 const std::string& atlas_path, const std::string& csv_path);

void stage_bench(const RunConfig& cfg, const std::string& unique_path,
                 const std::string& bench_path);

// One (label, atlas path) pair per surrogate config; an empty atlas path
// runs the random-search baseline.
void stage_replay(const RunConfig& cfg, const std::string& bench_path,
                  const std::vector<std::pair<std::string, std::string>>& configs,
                  const std::string& curves_path, const std::string& trace_path);

void stage_search(const RunConfig& cfg, const std::string& unique_path,
                  const std::string& trace_path, const std::string& atlas_path);

double stage_scatter(const std::string& bench_a, const std::string& bench_b,
                     const std::string& out_csv);

void stage_plot(const std::string& atlas_path, const std::string& bench_path,
                const std::string& curves_path, const std::string& out_dir);

// dedup -> features -> spectra -> embed (three feature modes) -> bench ->
// replay (three surrogate configs + random) -> plots, resuming from any
// artifacts already present in cfg.out_dir.
void run_pipeline(const RunConfig& cfg);

tensornet::Task task_from_config(const RunConfig& cfg);

}  // namespace aqs::pipeline
