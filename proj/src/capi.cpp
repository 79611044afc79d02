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

#include "aqs.h"

#include <cstring>
#include <string>

#include "afdsl/fingerprint.hpp"
#include "afdsl/graph.hpp"
#include "afdsl/space.hpp"
#include "core/hash.hpp"
#include "features/features.hpp"
#include "pipeline/config.hpp"
#include "pipeline/stages.hpp"
#include "search/search.hpp"

namespace {

thread_local std::string t_last_error = "";

aqs_status fail(aqs_status code, const std::string& message) {
  t_last_error = message;
  return code;
}

// Uniform exception barrier: library exceptions become status codes.
template <typename Fn>
aqs_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const aqs::afdsl::ParseError& e) {
    return fail(AQS_ERR_INVALID_ARG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(AQS_ERR_INVALID_ARG, e.what());
  } catch (const std::exception& e) {
    const std::string what = e.what();
    const bool io = what.find("cannot open") != std::string::npos ||
                    what.find("cannot write") != std::string::npos;
    return fail(io ? AQS_ERR_IO : AQS_ERR_RUNTIME, what);
  } catch (...) {
    return fail(AQS_ERR_RUNTIME, "unknown error");
  }
}

aqs_status copy_out(const std::string& s, char* buf, size_t cap, size_t* len) {
  if (len) *len = s.size();
  if (!buf || cap < s.size() + 1)
    return fail(AQS_ERR_INVALID_ARG, "buffer too small (" + std::to_string(s.size() + 1) +
                                         " bytes required)");
  std::memcpy(buf, s.data(), s.size());
  buf[s.size()] = '\0';
  return AQS_OK;
}

aqs::pipeline::RunConfig config_of(const char* text) {
  return aqs::pipeline::parse_config(text ? text : "");
}

}  // namespace

struct aqs_graph {
  aqs::afdsl::ActivationGraph graph;
};

struct aqs_space_iter {
  aqs::afdsl::SpaceId id;
  std::uint64_t next = 0;
  std::uint64_t size = 0;
};

struct aqs_probes {
  std::vector<double> values;
};

extern "C" {

const char* aqs_last_error(void) { return t_last_error.c_str(); }

const char* aqs_version(void) { return "aqs 1.0.0"; }

aqs_status aqs_graph_parse(const char* canonical, aqs_graph** out) {
  if (!canonical || !out) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    *out = new aqs_graph{aqs::afdsl::ActivationGraph::parse(canonical)};
    return AQS_OK;
  });
}

void aqs_graph_free(aqs_graph* graph) { delete graph; }

aqs_status aqs_graph_render(const aqs_graph* graph, char* buf, size_t cap,
                            size_t* len) {
  if (!graph) return fail(AQS_ERR_INVALID_ARG, "null graph");
  return guarded([&] { return copy_out(graph->graph.render(), buf, cap, len); });
}

aqs_status aqs_graph_eval(const aqs_graph* graph, const double* xs, size_t n,
                          double* out) {
  if (!graph || !xs || !out) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    graph->graph.evaluate({xs, n}, {out, n});
    return AQS_OK;
  });
}

aqs_status aqs_graph_eval_dual(const aqs_graph* graph, const double* xs, size_t n,
                               double* values, double* derivs) {
  if (!graph || !xs || !values || !derivs)
    return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    graph->graph.evaluate_dual({xs, n}, {values, n}, {derivs, n});
    return AQS_OK;
  });
}

aqs_status aqs_space_size(const char* space, uint64_t* count) {
  if (!space || !count) return fail(AQS_ERR_INVALID_ARG, "null argument");
  const auto id = aqs::afdsl::space_from_name(space);
  if (!id)
    return fail(AQS_ERR_INVALID_ARG, std::string("unknown space '") + space + "'");
  *count = aqs::afdsl::space_size(*id);
  return AQS_OK;
}

aqs_status aqs_space_iter_create(const char* space, aqs_space_iter** out) {
  if (!space || !out) return fail(AQS_ERR_INVALID_ARG, "null argument");
  const auto id = aqs::afdsl::space_from_name(space);
  if (!id)
    return fail(AQS_ERR_INVALID_ARG, std::string("unknown space '") + space + "'");
  *out = new aqs_space_iter{*id, 0, aqs::afdsl::space_size(*id)};
  return AQS_OK;
}

void aqs_space_iter_free(aqs_space_iter* it) { delete it; }

int aqs_space_iter_next(aqs_space_iter* it, char* buf, size_t cap) {
  if (!it || !buf) {
    fail(AQS_ERR_INVALID_ARG, "null argument");
    return -1;
  }
  if (it->next >= it->size) return 0;
  const std::string canonical =
      aqs::afdsl::graph_at(it->id, it->next).render();
  if (cap < canonical.size() + 1) {
    fail(AQS_ERR_INVALID_ARG, "buffer too small");
    return -1;
  }
  std::memcpy(buf, canonical.data(), canonical.size());
  buf[canonical.size()] = '\0';
  ++it->next;
  return 1;
}

aqs_status aqs_probes_create(uint64_t seed, size_t n, aqs_probes** out) {
  if (!out || n == 0) return fail(AQS_ERR_INVALID_ARG, "bad argument");
  *out = new aqs_probes{aqs::afdsl::make_probes(seed, n)};
  return AQS_OK;
}

void aqs_probes_free(aqs_probes* probes) { delete probes; }

aqs_status aqs_probes_values(const aqs_probes* probes, double* out, size_t cap) {
  if (!probes || !out) return fail(AQS_ERR_INVALID_ARG, "null argument");
  if (cap < probes->values.size())
    return fail(AQS_ERR_INVALID_ARG, "buffer too small");
  std::memcpy(out, probes->values.data(), probes->values.size() * sizeof(double));
  return AQS_OK;
}

aqs_status aqs_fingerprint(const aqs_graph* graph, const aqs_probes* probes,
                           double* values_or_null, uint64_t* digest) {
  if (!graph || !probes || !digest) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    const aqs::afdsl::OutputFingerprint fp =
        aqs::afdsl::fingerprint(graph->graph, probes->values);
    if (values_or_null)
      std::memcpy(values_or_null, fp.values.data(), fp.values.size() * sizeof(double));
    *digest = fp.digest;
    return AQS_OK;
  });
}

aqs_status aqs_dist_outputs(const double* a, const double* b, size_t n,
                            double* out) {
  if (!a || !b || !out) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    *out = aqs::features::dist_outputs({a, n}, {b, n});
    return AQS_OK;
  });
}

aqs_status aqs_dist_spectra(const int64_t* counts_a, const int64_t* counts_b,
                            const int32_t* bins, const int64_t* w, size_t layers,
                            double* out) {
  if (!counts_a || !counts_b || !bins || !w || !out)
    return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    aqs::kfac::SpectrumFeature fa, fb;
    std::size_t offset = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      aqs::kfac::LayerSpectrum la, lb;
      la.w = lb.w = w[l];
      la.bins = lb.bins = bins[l];
      la.counts.assign(counts_a + offset, counts_a + offset + bins[l]);
      lb.counts.assign(counts_b + offset, counts_b + offset + bins[l]);
      offset += bins[l];
      fa.layers.push_back(std::move(la));
      fb.layers.push_back(std::move(lb));
    }
    *out = aqs::features::dist_spectra(aqs::features::spectral_cdf(fa),
                                       aqs::features::spectral_cdf(fb));
    return AQS_OK;
  });
}

aqs_status aqs_knr_predict(const double* xs, const double* ys, const double* acc,
                           size_t n, double qx, double qy, int k, double* out) {
  if (!xs || !ys || !acc || !out) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    aqs::search::SurrogateState state;
    for (size_t i = 0; i < n; ++i)
      state.evaluated.push_back({"", {xs[i], ys[i]}, acc[i]});
    *out = aqs::search::knr_predict(state, {qx, qy}, k);
    return AQS_OK;
  });
}

aqs_status aqs_run_enumerate(const char* space, const char* out_path,
                             uint64_t* count) {
  if (!space || !out_path) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    const std::uint64_t n = aqs::pipeline::stage_enumerate(space, out_path);
    if (count) *count = n;
    return AQS_OK;
  });
}

aqs_status aqs_run_dedup(const char* config, const char* out_path) {
  if (!out_path) return fail(AQS_ERR_INVALID_ARG, "null out_path");
  return guarded([&] {
    aqs::pipeline::stage_dedup(config_of(config), out_path);
    return AQS_OK;
  });
}

aqs_status aqs_run_features(const char* unique_path, const char* out_path) {
  if (!unique_path || !out_path) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    aqs::pipeline::stage_features(unique_path, out_path);
    return AQS_OK;
  });
}

aqs_status aqs_run_spectra(const char* config, const char* unique_path,
                           const char* out_path) {
  if (!unique_path || !out_path) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    aqs::pipeline::stage_spectra(config_of(config), unique_path, out_path);
    return AQS_OK;
  });
}

aqs_status aqs_run_embed(const char* config, const char* outputs_path,
                         const char* spectra_path_or_null, const char* mode,
                         const char* atlas_path, const char* csv_path_or_null) {
  if (!outputs_path || !mode || !atlas_path)
    return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    aqs::pipeline::stage_embed(config_of(config), outputs_path,
                               spectra_path_or_null ? spectra_path_or_null : "",
                               mode, atlas_path,
                               csv_path_or_null ? csv_path_or_null : "");
    return AQS_OK;
  });
}

aqs_status aqs_run_bench_build(const char* config, const char* unique_path,
                               const char* bench_path) {
  if (!unique_path || !bench_path) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    aqs::pipeline::stage_bench(config_of(config), unique_path, bench_path);
    return AQS_OK;
  });
}

aqs_status aqs_run_search(const char* config, const char* unique_path,
                          const char* trace_path, const char* atlas_path_or_null) {
  if (!unique_path || !trace_path) return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    aqs::pipeline::stage_search(config_of(config), unique_path, trace_path,
                                atlas_path_or_null ? atlas_path_or_null : "");
    return AQS_OK;
  });
}

aqs_status aqs_run_replay(const char* config, const char* bench_path,
                          const char* const* labels, const char* const* atlases,
                          size_t count, const char* curves_path,
                          const char* trace_path_or_null) {
  if (!bench_path || !labels || !atlases || !curves_path || count == 0)
    return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    std::vector<std::pair<std::string, std::string>> configs;
    for (size_t i = 0; i < count; ++i)
      configs.push_back({labels[i], atlases[i] ? atlases[i] : ""});
    aqs::pipeline::stage_replay(config_of(config), bench_path, configs, curves_path,
                                trace_path_or_null ? trace_path_or_null : "");
    return AQS_OK;
  });
}

aqs_status aqs_run_scatter(const char* bench_a, const char* bench_b,
                           const char* out_csv, double* pearson) {
  if (!bench_a || !bench_b || !out_csv)
    return fail(AQS_ERR_INVALID_ARG, "null argument");
  return guarded([&] {
    const double r = aqs::pipeline::stage_scatter(bench_a, bench_b, out_csv);
    if (pearson) *pearson = r;
    return AQS_OK;
  });
}

aqs_status aqs_run_plot(const char* atlas_path_or_null,
                        const char* bench_path_or_null,
                        const char* curves_path_or_null, const char* out_dir) {
  if (!out_dir) return fail(AQS_ERR_INVALID_ARG, "null out_dir");
  return guarded([&] {
    aqs::pipeline::stage_plot(atlas_path_or_null ? atlas_path_or_null : "",
                              bench_path_or_null ? bench_path_or_null : "",
                              curves_path_or_null ? curves_path_or_null : "",
                              out_dir);
    return AQS_OK;
  });
}

aqs_status aqs_run_pipeline(const char* config) {
  return guarded([&] {
    aqs::pipeline::run_pipeline(config_of(config));
    return AQS_OK;
  });
}

aqs_status aqs_config_resolve(const char* config, char* buf, size_t cap,
                              size_t* len) {
  return guarded([&] {
    return copy_out(aqs::pipeline::serialize_config(config_of(config)), buf, cap, len);
  });
}

}  // extern "C"
