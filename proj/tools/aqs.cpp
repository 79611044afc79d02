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

// Command-line front end; everything substantive lives behind the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aqs.h"

namespace {

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> sets;  // raw key=value overrides

  // Builds the config text: file content first, then overrides (later
  // lines win during parsing).
  std::string assemble() const {
    std::ostringstream out;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw CLI::ValidationError("--config", "cannot open " + config_path);
      out << in.rdbuf() << "\n";
    }
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
      out << kv.substr(0, eq) << " = " << kv.substr(eq + 1) << "\n";
    }
    return out.str();
  }
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file");
  cmd->add_option("--set", args.sets,
                  "override a config key (key=value, repeatable)");
}

int finish(aqs_status status) {
  if (status == AQS_OK) return 0;
  std::cerr << "error: " << aqs_last_error() << "\n";
  return status == AQS_ERR_INVALID_ARG ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"activation-function quality search"};
  app.require_subcommand(1);
  int exit_code = 0;

  // enumerate
  {
    auto* cmd = app.add_subcommand("enumerate", "write every canonical in a space");
    auto space = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("canonicals.txt");
    cmd->add_option("--space", *space, "three-node | four-node")->required();
    cmd->add_option("--out", *out, "output file (one canonical per line)");
    cmd->callback([space, out, &exit_code] {
      uint64_t count = 0;
      const aqs_status s = aqs_run_enumerate(space->c_str(), out->c_str(), &count);
      if (s == AQS_OK) std::cerr << count << "\n";
      exit_code = finish(s);
    });
  }

  // dedup
  {
    auto* cmd = app.add_subcommand("dedup", "fingerprint a space and keep unique functions");
    auto args = std::make_shared<ConfigArgs>();
    auto out = std::make_shared<std::string>("unique.jsonl");
    add_config_options(cmd, *args);
    cmd->add_option("--out", *out, "unique table (JSONL)");
    cmd->callback([args, out, &exit_code] {
      exit_code = finish(aqs_run_dedup(args->assemble().c_str(), out->c_str()));
    });
  }

  // features
  {
    auto* cmd = app.add_subcommand("features", "output feature vectors for unique functions");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("outputs.jsonl");
    cmd->add_option("--in", *in, "unique table (JSONL)")->required();
    cmd->add_option("--out", *out, "output features (JSONL)");
    cmd->callback([in, out, &exit_code] {
      exit_code = finish(aqs_run_features(in->c_str(), out->c_str()));
    });
  }

  // spectra
  {
    auto* cmd = app.add_subcommand("spectra", "K-FAC spectrum features for unique functions");
    auto args = std::make_shared<ConfigArgs>();
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("spectra.jsonl");
    add_config_options(cmd, *args);
    cmd->add_option("--in", *in, "unique table (JSONL)")->required();
    cmd->add_option("--out", *out, "spectrum features (JSONL)");
    cmd->callback([args, in, out, &exit_code] {
      exit_code = finish(
          aqs_run_spectra(args->assemble().c_str(), in->c_str(), out->c_str()));
    });
  }

  // embed
  {
    auto* cmd = app.add_subcommand("embed", "fit the 2-D neighbor embedding");
    auto args = std::make_shared<ConfigArgs>();
    auto outputs = std::make_shared<std::string>();
    auto spectra = std::make_shared<std::string>();
    auto mode = std::make_shared<std::string>("both");
    auto out = std::make_shared<std::string>("atlas.jsonl");
    auto csv = std::make_shared<std::string>();
    add_config_options(cmd, *args);
    cmd->add_option("--outputs", *outputs, "output features (JSONL)")->required();
    cmd->add_option("--spectra", *spectra, "spectrum features (JSONL)");
    cmd->add_option("--mode", *mode, "outputs | spectra | both");
    cmd->add_option("--out", *out, "atlas (JSONL)");
    cmd->add_option("--csv", *csv, "also export coordinates as CSV");
    cmd->callback([args, outputs, spectra, mode, out, csv, &exit_code] {
      exit_code = finish(aqs_run_embed(
          args->assemble().c_str(), outputs->c_str(),
          spectra->empty() ? nullptr : spectra->c_str(), mode->c_str(),
          out->c_str(), csv->empty() ? nullptr : csv->c_str()));
    });
  }

  // bench-build
  {
    auto* cmd = app.add_subcommand("bench-build", "train every unique function into a benchmark table");
    auto args = std::make_shared<ConfigArgs>();
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("bench.jsonl");
    add_config_options(cmd, *args);
    cmd->add_option("--in", *in, "unique table (JSONL)")->required();
    cmd->add_option("--out", *out, "benchmark table (JSONL, .gz supported; resumable)");
    cmd->callback([args, in, out, &exit_code] {
      exit_code = finish(
          aqs_run_bench_build(args->assemble().c_str(), in->c_str(), out->c_str()));
    });
  }

  // search (live)
  {
    auto* cmd = app.add_subcommand("search", "streaming surrogate search with live training");
    auto args = std::make_shared<ConfigArgs>();
    auto in = std::make_shared<std::string>();
    auto trace = std::make_shared<std::string>("trace.csv");
    auto atlas = std::make_shared<std::string>();
    add_config_options(cmd, *args);
    cmd->add_option("--in", *in, "unique table (JSONL)")->required();
    cmd->add_option("--trace", *trace, "evaluation trace (CSV)");
    cmd->add_option("--atlas", *atlas, "also write the fitted atlas (JSONL)");
    cmd->callback([args, in, trace, atlas, &exit_code] {
      exit_code = finish(aqs_run_search(args->assemble().c_str(), in->c_str(),
                                        trace->c_str(),
                                        atlas->empty() ? nullptr : atlas->c_str()));
    });
  }

  // replay
  {
    auto* cmd = app.add_subcommand("replay", "replay searches against a benchmark table");
    auto args = std::make_shared<ConfigArgs>();
    auto bench = std::make_shared<std::string>();
    auto knr = std::make_shared<std::vector<std::string>>();
    auto random_baseline = std::make_shared<bool>(false);
    auto curves = std::make_shared<std::string>("curves.csv");
    auto trace = std::make_shared<std::string>();
    add_config_options(cmd, *args);
    cmd->add_option("--bench", *bench, "benchmark table (JSONL)")->required();
    cmd->add_option("--knr", *knr, "label=atlas.jsonl (repeatable)");
    cmd->add_flag("--random", *random_baseline, "include the random-search baseline");
    cmd->add_option("--curves", *curves, "aggregate curves (CSV)");
    cmd->add_option("--trace", *trace, "single-trial trace (CSV)");
    cmd->callback([args, bench, knr, random_baseline, curves, trace, &exit_code] {
      std::vector<std::string> labels, atlases;
      for (const std::string& kv : *knr) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
          std::cerr << "error: --knr expects label=atlas.jsonl\n";
          exit_code = 2;
          return;
        }
        labels.push_back(kv.substr(0, eq));
        atlases.push_back(kv.substr(eq + 1));
      }
      if (*random_baseline) {
        labels.push_back("random");
        atlases.push_back("");
      }
      if (labels.empty()) {
        std::cerr << "error: nothing to replay (use --knr and/or --random)\n";
        exit_code = 2;
        return;
      }
      std::vector<const char*> lptr, aptr;
      for (const auto& l : labels) lptr.push_back(l.c_str());
      for (const auto& a : atlases) aptr.push_back(a.empty() ? nullptr : a.c_str());
      exit_code = finish(aqs_run_replay(
          args->assemble().c_str(), bench->c_str(), lptr.data(), aptr.data(),
          lptr.size(), curves->c_str(), trace->empty() ? nullptr : trace->c_str()));
    });
  }

  // scatter
  {
    auto* cmd = app.add_subcommand("scatter", "pair accuracies of two benchmark tables");
    auto a = std::make_shared<std::string>();
    auto b = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("scatter.csv");
    cmd->add_option("--a", *a, "first benchmark table")->required();
    cmd->add_option("--b", *b, "second benchmark table")->required();
    cmd->add_option("--out", *out, "paired accuracies (CSV)");
    cmd->callback([a, b, out, &exit_code] {
      double pearson = 0.0;
      const aqs_status s =
          aqs_run_scatter(a->c_str(), b->c_str(), out->c_str(), &pearson);
      if (s == AQS_OK) std::fprintf(stderr, "pearson %.4f\n", pearson);
      exit_code = finish(s);
    });
  }

  // plot
  {
    auto* cmd = app.add_subcommand("plot", "render SVG plots from artifacts");
    auto atlas = std::make_shared<std::string>();
    auto bench = std::make_shared<std::string>();
    auto curves = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>(".");
    cmd->add_option("--atlas", *atlas, "atlas (JSONL) for the embedding scatter");
    cmd->add_option("--bench", *bench, "benchmark table coloring the scatter");
    cmd->add_option("--curves", *curves, "curves CSV for the progress plot");
    cmd->add_option("--out", *out, "output directory");
    cmd->callback([atlas, bench, curves, out, &exit_code] {
      exit_code = finish(aqs_run_plot(atlas->empty() ? nullptr : atlas->c_str(),
                                      bench->empty() ? nullptr : bench->c_str(),
                                      curves->empty() ? nullptr : curves->c_str(),
                                      out->c_str()));
    });
  }

  // pipeline
  {
    auto* cmd = app.add_subcommand("pipeline", "run all stages end to end (resumable)");
    auto args = std::make_shared<ConfigArgs>();
    add_config_options(cmd, *args);
    cmd->callback([args, &exit_code] {
      exit_code = finish(aqs_run_pipeline(args->assemble().c_str()));
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }
  return exit_code;
}
