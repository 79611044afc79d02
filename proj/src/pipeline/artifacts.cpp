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

#include "pipeline/artifacts.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace aqs::pipeline {

namespace {

using nlohmann::json;

bool is_gz(const std::string& path) { return path.ends_with(".gz"); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t from_hex64(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

json parse_line(const std::string& line, const std::string& path) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("malformed JSON line in " + path);
  return j;
}

void expect_type(const json& header, const std::string& type,
                 const std::string& path) {
  if (header.value("type", "") != type)
    throw std::runtime_error(path + " is not a " + type + " file");
}

// JSON has no non-finite numbers; spell them out as strings.
json values_to_json(const std::vector<double>& values) {
  json arr = json::array();
  for (double v : values) {
    if (std::isfinite(v)) {
      arr.push_back(v);
    } else if (std::isnan(v)) {
      arr.push_back("NaN");
    } else {
      arr.push_back(v > 0 ? "Infinity" : "-Infinity");
    }
  }
  return arr;
}

std::vector<double> values_from_json(const json& arr) {
  std::vector<double> values;
  values.reserve(arr.size());
  for (const json& v : arr) {
    if (v.is_number()) {
      values.push_back(v.get<double>());
    } else if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "NaN")
        values.push_back(std::numeric_limits<double>::quiet_NaN());
      else if (s == "Infinity")
        values.push_back(std::numeric_limits<double>::infinity());
      else if (s == "-Infinity")
        values.push_back(-std::numeric_limits<double>::infinity());
      else
        throw std::runtime_error("bad numeric string '" + s + "'");
    } else if (v.is_null()) {
      values.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      throw std::runtime_error("bad value in numeric array");
    }
  }
  return values;
}

}  // namespace

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  if (is_gz(path)) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string current;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof buf)) > 0) {
      for (int i = 0; i < n; ++i) {
        if (buf[i] == '\n') {
          lines.push_back(std::move(current));
          current.clear();
        } else {
          current.push_back(buf[i]);
        }
      }
    }
    gzclose(f);
    if (!current.empty()) lines.push_back(std::move(current));
  } else {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  if (is_gz(path)) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + path);
    for (const std::string& l : lines) {
      gzwrite(f, l.data(), static_cast<unsigned>(l.size()));
      gzwrite(f, "\n", 1);
    }
    gzclose(f);
  } else {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const std::string& l : lines) out << l << "\n";
  }
}

bool file_exists(const std::string& path) {
  return std::filesystem::exists(path);
}

void write_unique(const std::string& path, const UniqueFileHeader& header,
                  const std::vector<UniqueFileRow>& rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size() + 1);
  json h = {{"type", "unique_table"},   {"space", header.space},
            {"probe_seed", header.probe_seed}, {"n_probes", header.n_probes},
            {"total", header.total},    {"unique_full", header.unique_full},
            {"sample", header.sample},  {"seed", header.seed}};
  lines.push_back(h.dump());
  for (const auto& r : rows) {
    json j = {{"canonical", r.canonical},
              {"digest", hex64(r.digest)},
              {"index", r.index}};
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

std::pair<UniqueFileHeader, std::vector<UniqueFileRow>> load_unique(
    const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + " is empty");
  json h = parse_line(lines[0], path);
  expect_type(h, "unique_table", path);
  UniqueFileHeader header;
  header.space = h.value("space", "");
  header.probe_seed = h.value("probe_seed", 0ull);
  header.n_probes = h.value("n_probes", 0ull);
  header.total = h.value("total", 0ull);
  header.unique_full = h.value("unique_full", 0ull);
  header.sample = h.value("sample", 0ull);
  header.seed = h.value("seed", 0ull);
  std::vector<UniqueFileRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = parse_line(lines[i], path);
    rows.push_back({j.at("canonical").get<std::string>(),
                    from_hex64(j.at("digest").get<std::string>()),
                    j.value("index", 0ull)});
  }
  return {header, rows};
}

void write_outputs(const std::string& path, std::uint64_t probe_seed,
                   const std::vector<OutputsFileRow>& rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size() + 1);
  json h = {{"type", "output_features"},
            {"probe_seed", probe_seed},
            {"n", rows.empty() ? 0 : rows[0].values.size()}};
  lines.push_back(h.dump());
  for (const auto& r : rows) {
    json j = {{"canonical", r.canonical}, {"values", values_to_json(r.values)}};
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

std::pair<std::uint64_t, std::vector<OutputsFileRow>> load_outputs(
    const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + " is empty");
  json h = parse_line(lines[0], path);
  expect_type(h, "output_features", path);
  std::vector<OutputsFileRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = parse_line(lines[i], path);
    rows.push_back({j.at("canonical").get<std::string>(),
                    values_from_json(j.at("values"))});
  }
  return {h.value("probe_seed", 0ull), rows};
}

void write_spectra(const std::string& path, const SpectraFileHeader& header,
                   const std::vector<SpectraFileRow>& rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size() + 1);
  json h = {{"type", "spectrum_features"}, {"task", header.task},
            {"net_digest", hex64(header.net_digest)},
            {"fim_batch", header.fim_batch}, {"mc_samples", header.mc_samples},
            {"seed", header.seed}};
  lines.push_back(h.dump());
  for (const auto& r : rows) {
    json layers = json::array();
    for (const auto& l : r.layers)
      layers.push_back({{"w", l.w}, {"bins", l.bins}, {"counts", l.counts}});
    json j = {{"canonical", r.canonical},
              {"valid", r.valid},
              {"degenerate", r.degenerate},
              {"per_layer", layers}};
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

std::pair<SpectraFileHeader, std::vector<SpectraFileRow>> load_spectra(
    const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + " is empty");
  json h = parse_line(lines[0], path);
  expect_type(h, "spectrum_features", path);
  SpectraFileHeader header;
  header.task = h.value("task", "");
  header.net_digest = from_hex64(h.value("net_digest", std::string(16, '0')));
  header.fim_batch = h.value("fim_batch", 0);
  header.mc_samples = h.value("mc_samples", 0);
  header.seed = h.value("seed", 0ull);
  std::vector<SpectraFileRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = parse_line(lines[i], path);
    SpectraFileRow row;
    row.canonical = j.at("canonical").get<std::string>();
    row.valid = j.value("valid", false);
    row.degenerate = j.value("degenerate", false);
    for (const json& l : j.value("per_layer", json::array())) {
      kfac::LayerSpectrum layer;
      layer.w = l.value("w", 0ll);
      layer.bins = l.value("bins", 1);
      layer.counts = l.value("counts", std::vector<std::int64_t>{});
      row.layers.push_back(std::move(layer));
    }
    rows.push_back(std::move(row));
  }
  return {header, rows};
}

void write_atlas(const std::string& path, const embed::LayoutConfig& cfg,
                 double curve_a, double curve_b,
                 const std::vector<AtlasFileRow>& rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size() + 1);
  json h = {{"type", "atlas"},
            {"metric", cfg.metric_name},
            {"n_neighbors", cfg.n_neighbors},
            {"min_dist", cfg.min_dist},
            {"epochs", cfg.epochs},
            {"negative_sample_rate", cfg.negative_sample_rate},
            {"seed", cfg.seed},
            {"curve_a", curve_a},
            {"curve_b", curve_b}};
  lines.push_back(h.dump());
  for (const auto& r : rows) {
    json j = {{"canonical", r.canonical}, {"x", r.x}, {"y", r.y}};
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

std::pair<embed::LayoutConfig, std::vector<AtlasFileRow>> load_atlas(
    const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + " is empty");
  json h = parse_line(lines[0], path);
  expect_type(h, "atlas", path);
  embed::LayoutConfig cfg;
  cfg.metric_name = h.value("metric", "");
  cfg.n_neighbors = h.value("n_neighbors", 15);
  cfg.min_dist = h.value("min_dist", 0.1);
  cfg.epochs = h.value("epochs", 200);
  cfg.negative_sample_rate = h.value("negative_sample_rate", 5);
  cfg.seed = h.value("seed", 0ull);
  std::vector<AtlasFileRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = parse_line(lines[i], path);
    rows.push_back({j.at("canonical").get<std::string>(), j.at("x").get<double>(),
                    j.at("y").get<double>()});
  }
  return {cfg, rows};
}

void export_atlas_csv(const std::string& path, const std::vector<AtlasFileRow>& rows) {
  std::vector<std::string> lines = {"canonical,x,y"};
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", r.x, r.y);
    lines.push_back("\"" + r.canonical + "\"" + buf);
  }
  write_lines(path, lines);
}

namespace {

json bench_header_json(const bench::BenchHeader& h) {
  return {{"type", "bench"},
          {"task", h.task},
          {"net_digest", hex64(h.net_digest)},
          {"train",
           {{"epochs", h.train.epochs},
            {"batch_size", h.train.batch_size},
            {"momentum", h.train.momentum},
            {"peak_lr", h.train.peak_lr},
            {"warmup_epochs", h.train.warmup_epochs},
            {"seed", h.train.seed}}},
          {"fim", {{"batch", h.fim.batch}, {"mc_samples", h.fim.mc_samples}}},
          {"probe_seed", h.probe_seed},
          {"runs_per_fn", h.runs_per_fn},
          {"num_classes", h.num_classes}};
}

std::string bench_row_line(const bench::BenchRow& r) {
  json j = {{"canonical", r.canonical},
            {"accuracy", r.accuracy},
            {"valid_spectrum", r.valid_spectrum},
            {"degenerate_spectrum", r.degenerate_spectrum},
            {"runs", r.runs}};
  return j.dump();
}

}  // namespace

void write_bench(const std::string& path, const bench::BenchmarkTable& table) {
  std::vector<std::string> lines;
  lines.reserve(table.size() + 1);
  lines.push_back(bench_header_json(table.header).dump());
  for (const auto& r : table.rows()) lines.push_back(bench_row_line(r));
  write_lines(path, lines);
}

bench::BenchmarkTable load_bench(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + " is empty");
  json h = parse_line(lines[0], path);
  expect_type(h, "bench", path);
  bench::BenchmarkTable table;
  table.header.task = h.value("task", "");
  table.header.net_digest = from_hex64(h.value("net_digest", std::string(16, '0')));
  if (h.contains("train")) {
    const json& t = h["train"];
    table.header.train.epochs = t.value("epochs", 20);
    table.header.train.batch_size = t.value("batch_size", 128);
    table.header.train.momentum = t.value("momentum", 0.9);
    table.header.train.peak_lr = t.value("peak_lr", 0.1);
    table.header.train.warmup_epochs = t.value("warmup_epochs", 3);
    table.header.train.seed = t.value("seed", 1ull);
  }
  if (h.contains("fim")) {
    table.header.fim.batch = h["fim"].value("batch", 128);
    table.header.fim.mc_samples = h["fim"].value("mc_samples", 1);
  }
  table.header.probe_seed = h.value("probe_seed", 0ull);
  table.header.runs_per_fn = h.value("runs_per_fn", 3);
  table.header.num_classes = h.value("num_classes", 0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = parse_line(lines[i], path);
    bench::BenchRow row;
    row.canonical = j.at("canonical").get<std::string>();
    row.accuracy = j.at("accuracy").get<double>();
    row.valid_spectrum = j.value("valid_spectrum", false);
    row.degenerate_spectrum = j.value("degenerate_spectrum", false);
    row.runs = j.value("runs", std::vector<double>{});
    table.add_row(std::move(row));
  }
  return table;
}

void append_bench_rows(const std::string& path, const bench::BenchHeader& header,
                       const std::vector<bench::BenchRow>& rows, bool fresh) {
  if (is_gz(path)) {
    // gzip append produces a multi-member stream, which gzread handles
    gzFile f = gzopen(path.c_str(), fresh ? "wb" : "ab");
    if (!f) throw std::runtime_error("cannot write " + path);
    auto put = [&](const std::string& s) {
      gzwrite(f, s.data(), static_cast<unsigned>(s.size()));
      gzwrite(f, "\n", 1);
    };
    if (fresh) put(bench_header_json(header).dump());
    for (const auto& r : rows) put(bench_row_line(r));
    gzclose(f);
    return;
  }
  std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (fresh) out << bench_header_json(header).dump() << "\n";
  for (const auto& r : rows) out << bench_row_line(r) << "\n";
}

void write_trace_csv(const std::string& path, const search::SearchTrace& trace) {
  std::vector<std::string> lines = {"step,canonical,accuracy,predicted,best_so_far"};
  char buf[128];
  for (const auto& r : trace.rows) {
    if (std::isnan(r.predicted)) {
      std::snprintf(buf, sizeof buf, "%d,\"%s\",%.6f,,%.6f", r.step,
                    r.canonical.c_str(), r.accuracy, r.best_so_far);
    } else {
      std::snprintf(buf, sizeof buf, "%d,\"%s\",%.6f,%.6f,%.6f", r.step,
                    r.canonical.c_str(), r.accuracy, r.predicted, r.best_so_far);
    }
    lines.push_back(buf);
  }
  write_lines(path, lines);
}

void write_curves_csv(const std::string& path,
                      const std::vector<bench::AggregateCurve>& curves) {
  std::vector<std::string> lines = {"config,step,mean,ci_low,ci_high"};
  char buf[160];
  for (const auto& c : curves) {
    for (std::size_t s = 0; s < c.mean.size(); ++s) {
      std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f", c.label.c_str(), s + 1,
                    c.mean[s], c.ci_lo[s], c.ci_hi[s]);
      lines.push_back(buf);
    }
  }
  write_lines(path, lines);
}

std::vector<bench::AggregateCurve> load_curves_csv(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<bench::AggregateCurve> curves;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::istringstream is(lines[i]);
    std::string label, step, mean, lo, hi;
    std::getline(is, label, ',');
    std::getline(is, step, ',');
    std::getline(is, mean, ',');
    std::getline(is, lo, ',');
    std::getline(is, hi, ',');
    if (curves.empty() || curves.back().label != label) {
      curves.push_back({});
      curves.back().label = label;
    }
    curves.back().mean.push_back(std::stod(mean));
    curves.back().ci_lo.push_back(std::stod(lo));
    curves.back().ci_hi.push_back(std::stod(hi));
  }
  return curves;
}

void write_scatter_csv(const std::string& path, const bench::ScatterResult& scatter) {
  std::vector<std::string> lines = {"canonical,acc_a,acc_b"};
  char buf[64];
  for (const auto& p : scatter.points) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f", p.acc_a, p.acc_b);
    lines.push_back("\"" + p.canonical + "\"" + buf);
  }
  write_lines(path, lines);
}

}  // namespace aqs::pipeline
