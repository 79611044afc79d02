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

#include <optional>
#include <string>
#include <vector>

#include "bench/bench.hpp"
#include "embed/embed.hpp"
#include "kfac/kfac.hpp"

namespace aqs::pipeline {

// All persisted tables are JSON-lines: one JSON header object on the first
// line, one JSON row per following line. A trailing ".gz" on any path
// switches to gzip framing transparently.

struct UniqueFileHeader {
  std::string space;
  std::uint64_t probe_seed = 0;
  std::uint64_t n_probes = 0;
  std::uint64_t total = 0;        // graphs enumerated
  std::uint64_t unique_full = 0;  // distinct fingerprints in the full space
  std::uint64_t sample = 0;       // 0 = all unique functions listed
  std::uint64_t seed = 0;
};

struct UniqueFileRow {
  std::string canonical;
  std::uint64_t digest = 0;
  std::uint64_t index = 0;
};

void write_unique(const std::string& path, const UniqueFileHeader& header,
                  const std::vector<UniqueFileRow>& rows);
std::pair<UniqueFileHeader, std::vector<UniqueFileRow>> load_unique(
    const std::string& path);

struct OutputsFileRow {
  std::string canonical;
  std::vector<double> values;
};

void write_outputs(const std::string& path, std::uint64_t probe_seed,
                   const std::vector<OutputsFileRow>& rows);
std::pair<std::uint64_t, std::vector<OutputsFileRow>> load_outputs(
    const std::string& path);

struct SpectraFileHeader {
  std::string task;
  std::uint64_t net_digest = 0;
  int fim_batch = 0;
  int mc_samples = 0;
  std::uint64_t seed = 0;
};

struct SpectraFileRow {
  std::string canonical;
  bool valid = false;
  bool degenerate = false;
  std::vector<kfac::LayerSpectrum> layers;  // histograms only (log_eigs empty)
};

void write_spectra(const std::string& path, const SpectraFileHeader& header,
                   const std::vector<SpectraFileRow>& rows);
std::pair<SpectraFileHeader, std::vector<SpectraFileRow>> load_spectra(
    const std::string& path);

struct AtlasFileRow {
  std::string canonical;
  double x = 0.0;
  double y = 0.0;
};

void write_atlas(const std::string& path, const embed::LayoutConfig& cfg,
                 double curve_a, double curve_b,
                 const std::vector<AtlasFileRow>& rows);
std::pair<embed::LayoutConfig, std::vector<AtlasFileRow>> load_atlas(
    const std::string& path);
void export_atlas_csv(const std::string& path, const std::vector<AtlasFileRow>& rows);

void write_bench(const std::string& path, const bench::BenchmarkTable& table);
bench::BenchmarkTable load_bench(const std::string& path);
// Appends rows to an existing file (resume); writes the header when the
// file does not exist yet.
void append_bench_rows(const std::string& path, const bench::BenchHeader& header,
                       const std::vector<bench::BenchRow>& rows, bool fresh);

void write_trace_csv(const std::string& path, const search::SearchTrace& trace);
void write_curves_csv(const std::string& path,
                      const std::vector<bench::AggregateCurve>& curves);
std::vector<bench::AggregateCurve> load_curves_csv(const std::string& path);
void write_scatter_csv(const std::string& path, const bench::ScatterResult& scatter);

// Whole-file helpers with gzip support.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);
bool file_exists(const std::string& path);

}  // namespace aqs::pipeline
