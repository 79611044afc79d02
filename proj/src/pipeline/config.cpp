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

#include "pipeline/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace aqs::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
T parse_value(const std::string& v);

template <>
std::string parse_value<std::string>(const std::string& v) {
  return v;
}
template <>
int parse_value<int>(const std::string& v) {
  return std::stoi(v);
}
template <>
std::uint64_t parse_value<std::uint64_t>(const std::string& v) {
  return std::stoull(v);
}
template <>
double parse_value<double>(const std::string& v) {
  return std::stod(v);
}

template <typename T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, double>) {
    std::ostringstream os;
    os << v;
    return os.str();
  } else {
    return std::to_string(v);
  }
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto add = [&t](const std::string& name, auto member) {
      t[name] = Field{
          [member](RunConfig& cfg, const std::string& v) {
            cfg.*member = parse_value<
                std::decay_t<decltype(std::declval<RunConfig>().*member)>>(v);
          },
          [member](const RunConfig& cfg) { return format_value(cfg.*member); }};
    };
    add("space", &RunConfig::space);
    add("task", &RunConfig::task);
    add("features", &RunConfig::features);
    add("algorithm", &RunConfig::algorithm);
    add("init", &RunConfig::init);
    add("out_dir", &RunConfig::out_dir);
    add("data_images", &RunConfig::data_images);
    add("data_labels", &RunConfig::data_labels);
    add("data_csv", &RunConfig::data_csv);
    add("seed", &RunConfig::seed);
    add("probe_seed", &RunConfig::probe_seed);
    add("sample", &RunConfig::sample);
    add("trials", &RunConfig::trials);
    add("budget", &RunConfig::budget);
    add("k", &RunConfig::k);
    add("batch_width", &RunConfig::batch_width);
    add("runs_per_fn", &RunConfig::runs_per_fn);
    add("runs_per_eval", &RunConfig::runs_per_eval);
    add("workers", &RunConfig::workers);
    add("fim_batch", &RunConfig::fim_batch);
    add("mc_samples", &RunConfig::mc_samples);
    add("epochs", &RunConfig::epochs);
    add("batch_size", &RunConfig::batch_size);
    add("peak_lr", &RunConfig::peak_lr);
    add("momentum", &RunConfig::momentum);
    add("warmup_epochs", &RunConfig::warmup_epochs);
    add("task_train", &RunConfig::task_train);
    add("task_val", &RunConfig::task_val);
    add("n_neighbors_outputs", &RunConfig::n_neighbors_outputs);
    add("n_neighbors_spectra", &RunConfig::n_neighbors_spectra);
    add("min_dist", &RunConfig::min_dist);
    add("layout_epochs", &RunConfig::layout_epochs);
    add("negative_sample_rate", &RunConfig::negative_sample_rate);
    add("pool_threshold", &RunConfig::pool_threshold);
    add("producer_batch", &RunConfig::producer_batch);
    return t;
  }();
  return table;
}

void check_one_of(const std::string& key, const std::string& value,
                  std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string options;
  for (const char* a : allowed) options += std::string(options.empty() ? "" : "|") + a;
  throw std::invalid_argument("config: " + key + " must be one of " + options +
                              ", got '" + value + "'");
}

}  // namespace

void RunConfig::validate() const {
  check_one_of("space", space, {"three-node", "four-node"});
  check_one_of("task", task, {"blobs", "tiles", "idx", "csv"});
  check_one_of("features", features, {"outputs", "spectra", "both"});
  check_one_of("algorithm", algorithm, {"knr", "random"});
  check_one_of("init", init, {"relu-plus-random", "named-baselines"});
  if (task == "idx" && (data_images.empty() || data_labels.empty()))
    throw std::invalid_argument("config: idx task requires data_images and data_labels");
  if (task == "csv" && data_csv.empty())
    throw std::invalid_argument("config: csv task requires data_csv");
  if (trials <= 0) throw std::invalid_argument("config: trials must be positive");
  if (budget <= 8) throw std::invalid_argument("config: budget must exceed the init size");
  if (sample < 0) throw std::invalid_argument("config: sample must be >= 0");
  if (k < 1 || batch_width < 1 || runs_per_fn < 1 || runs_per_eval < 1)
    throw std::invalid_argument("config: k, batch_width and run counts must be >= 1");
  if (fim_batch < 1 || mc_samples < 1)
    throw std::invalid_argument("config: fim_batch and mc_samples must be >= 1");
  if (epochs < 1 || batch_size < 1 || warmup_epochs < 0 || warmup_epochs > epochs)
    throw std::invalid_argument("config: bad training schedule");
  if (peak_lr <= 0 || momentum < 0 || momentum >= 1)
    throw std::invalid_argument("config: bad optimizer settings");
  if (task_train < 8 || task_val < 8)
    throw std::invalid_argument("config: task splits too small");
  if (n_neighbors_outputs < 1 || n_neighbors_spectra < 1 || layout_epochs < 1 ||
      min_dist <= 0 || negative_sample_rate < 0)
    throw std::invalid_argument("config: bad embedding settings");
  if (pool_threshold < 16 || producer_batch < 1)
    throw std::invalid_argument("config: bad live-search settings");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = fields().find(key);
    if (it == fields().end())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    try {
      it->second.set(cfg, value);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [key, field] : fields()) os << key << " = " << field.get(cfg) << "\n";
  return os.str();
}

}  // namespace aqs::pipeline
