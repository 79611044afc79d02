/* Copyright 2026 The aqs Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* aqs - activation-function quality search.
 *
 * C interface to the aqs core: activation-function computation graphs,
 * exhaustive space enumeration, output fingerprints, K-FAC spectrum
 * features, neighbor embeddings, surrogate search and benchmark replay.
 *
 * Conventions: every function returns aqs_status (AQS_OK == 0); on any
 * failure aqs_last_error() describes the problem for the calling thread.
 * Objects returned through aqs_*_create/parse must be released with the
 * matching aqs_*_free.
 */

#ifndef AQS_H_
#define AQS_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aqs_status {
  AQS_OK = 0,
  AQS_ERR_INVALID_ARG = 1, /* bad input, unknown name, malformed syntax */
  AQS_ERR_IO = 2,          /* file missing or unreadable/unwritable */
  AQS_ERR_RUNTIME = 3      /* anything else */
} aqs_status;

/* Message for the most recent failure on this thread; never NULL. */
const char* aqs_last_error(void);

const char* aqs_version(void);

/* ---- activation-function graphs ------------------------------------- */

typedef struct aqs_graph aqs_graph;

/* Grammar: `x` | `unary_<name>(E)` | `binary_<name>(E,E)` | `nary_<name>(E,E,E)`. */
aqs_status aqs_graph_parse(const char* canonical, aqs_graph** out);
void aqs_graph_free(aqs_graph* graph);

/* Canonical rendering; `len` receives the string length. Returns
 * AQS_ERR_INVALID_ARG when `cap` is too small (len still reports the need). */
aqs_status aqs_graph_render(const aqs_graph* graph, char* buf, size_t cap,
                            size_t* len);

/* Element-wise evaluation; non-finite outputs are legal values. */
aqs_status aqs_graph_eval(const aqs_graph* graph, const double* xs, size_t n,
                          double* out);

/* Forward-mode values and first derivatives. */
aqs_status aqs_graph_eval_dual(const aqs_graph* graph, const double* xs, size_t n,
                               double* values, double* derivs);

/* ---- search spaces ---------------------------------------------------- */

/* Space names: "three-node", "four-node". */
aqs_status aqs_space_size(const char* space, uint64_t* count);

typedef struct aqs_space_iter aqs_space_iter;

aqs_status aqs_space_iter_create(const char* space, aqs_space_iter** out);
void aqs_space_iter_free(aqs_space_iter* it);

/* 1 = a canonical string was written, 0 = exhausted, <0 = error
 * (cap too small leaves the iterator unchanged). */
int aqs_space_iter_next(aqs_space_iter* it, char* buf, size_t cap);

/* ---- probes and fingerprints ------------------------------------------ */

typedef struct aqs_probes aqs_probes;

/* n standard-normal samples truncated to [-5,5]; seed 42 and n = 1000 are
 * the benchmark defaults. */
aqs_status aqs_probes_create(uint64_t seed, size_t n, aqs_probes** out);
void aqs_probes_free(aqs_probes* probes);
aqs_status aqs_probes_values(const aqs_probes* probes, double* out, size_t cap);

/* Output fingerprint: values (optional, size n) and the 64-bit digest of
 * their little-endian byte concatenation. */
aqs_status aqs_fingerprint(const aqs_graph* graph, const aqs_probes* probes,
                           double* values_or_null, uint64_t* digest);

/* ---- distance metrics -------------------------------------------------- */

/* Root-mean-square difference between two output vectors. */
aqs_status aqs_dist_outputs(const double* a, const double* b, size_t n,
                            double* out);

/* Weighted layer-wise 1-Wasserstein distance between two spectral
 * histogram sets on the same grid. Layer l holds `bins[l]` consecutive
 * counts; `w[l]` is the layer parameter count. */
aqs_status aqs_dist_spectra(const int64_t* counts_a, const int64_t* counts_b,
                            const int32_t* bins, const int64_t* w, size_t layers,
                            double* out);

/* ---- k-nearest-neighbor regression ------------------------------------ */

/* Inverse-distance-weighted KNR over 2-D coordinates; exact matches return
 * the mean accuracy of the zero-distance points. */
aqs_status aqs_knr_predict(const double* xs, const double* ys, const double* acc,
                           size_t n, double qx, double qy, int k, double* out);

/* ---- pipeline stages (file to file) ------------------------------------ */
/* `config` is the documented `key = value` schema (NULL or "" = defaults);
 * stage inputs/outputs are JSONL/CSV paths as produced by the other stages. */

aqs_status aqs_run_enumerate(const char* space, const char* out_path,
                             uint64_t* count);
aqs_status aqs_run_dedup(const char* config, const char* out_path);
aqs_status aqs_run_features(const char* unique_path, const char* out_path);
aqs_status aqs_run_spectra(const char* config, const char* unique_path,
                           const char* out_path);
aqs_status aqs_run_embed(const char* config, const char* outputs_path,
                         const char* spectra_path_or_null, const char* mode,
                         const char* atlas_path, const char* csv_path_or_null);
aqs_status aqs_run_bench_build(const char* config, const char* unique_path,
                               const char* bench_path);
aqs_status aqs_run_search(const char* config, const char* unique_path,
                          const char* trace_path, const char* atlas_path_or_null);
/* labels/atlases: `count` parallel arrays; an empty atlas path replays the
 * random baseline for that label. */
aqs_status aqs_run_replay(const char* config, const char* bench_path,
                          const char* const* labels, const char* const* atlases,
                          size_t count, const char* curves_path,
                          const char* trace_path_or_null);
aqs_status aqs_run_scatter(const char* bench_a, const char* bench_b,
                           const char* out_csv, double* pearson);
aqs_status aqs_run_plot(const char* atlas_path_or_null,
                        const char* bench_path_or_null,
                        const char* curves_path_or_null, const char* out_dir);
aqs_status aqs_run_pipeline(const char* config);

/* Echoes the fully resolved configuration for a config text (defaults
 * filled in); same buffer contract as aqs_graph_render. */
aqs_status aqs_config_resolve(const char* config, char* buf, size_t cap,
                              size_t* len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AQS_H_ */
