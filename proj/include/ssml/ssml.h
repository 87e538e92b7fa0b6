/*
 * Copyright 2026 The SSML Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of libssml: metric learning with a contrastive auxiliary loss
 * for music retrieval and auto-tagging.
 *
 * Every function returns an ssml_status. On failure a description of the
 * most recent error on the calling thread is available from
 * ssml_last_error(). Objects are opaque and owned by the caller, who
 * releases them with the matching *_destroy function (NULL is accepted).
 */

#ifndef SSML_SSML_H_
#define SSML_SSML_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SSML_API __declspec(dllexport)
#else
#define SSML_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssml_status {
  SSML_OK = 0,
  SSML_ERR_USAGE = 1,   /* invalid argument, configuration or state */
  SSML_ERR_DATA = 2,    /* unreadable, malformed or inconsistent data */
  SSML_ERR_NUMERIC = 3  /* non-finite values or degenerate geometry */
} ssml_status;

typedef struct ssml_config ssml_config;
typedef struct ssml_dataset ssml_dataset;
typedef struct ssml_model ssml_model;

/* Receives one line of text (without trailing newline). */
typedef void (*ssml_line_fn)(const char* line, void* user);

SSML_API const char* ssml_version(void);
SSML_API const char* ssml_last_error(void);

/* ---- configuration: flat key=value settings ---------------------------- */

SSML_API ssml_status ssml_config_create(ssml_config** out);
SSML_API void ssml_config_destroy(ssml_config* config);
SSML_API ssml_status ssml_config_set(ssml_config* config, const char* key, const char* value);
/* Applies every "key=value" line of a file, in order. */
SSML_API ssml_status ssml_config_load_file(ssml_config* config, const char* path);
/* Copies the value of `key` into `buf` (NUL terminated). */
SSML_API ssml_status ssml_config_get(const ssml_config* config, const char* key, char* buf,
                                     size_t buf_size);
/* Writes every key=value pair, one per line, into `buf`. */
SSML_API ssml_status ssml_config_dump(const ssml_config* config, char* buf, size_t buf_size);
/* lambda = alpha / balance_ratio. */
SSML_API ssml_status ssml_config_lambda(const ssml_config* config, double* lambda);

/* ---- balancing factor --------------------------------------------------- */

/* r = converged_ml / converged_ssl and lambda = alpha / r. */
SSML_API ssml_status ssml_balance_factor(double converged_ml, double converged_ssl, double alpha,
                                         double* r, double* lambda);
/* Reference ratios: "magnatagatune" (22.00) and "mtg-jamendo" (18.95). */
SSML_API ssml_status ssml_balance_preset(const char* name, double* r);

/* ---- data --------------------------------------------------------------- */

typedef struct ssml_synth_spec {
  size_t tracks;
  size_t track_length;
  size_t tag_count;
  int sample_rate_hz;
  double noise_level;
  uint64_t seed;
} ssml_synth_spec;

SSML_API void ssml_synth_spec_default(ssml_synth_spec* spec);
/* Writes <dir>/audio/<id>.wav, <dir>/tags.tsv and <dir>/splits.tsv. */
SSML_API ssml_status ssml_synth_write(const ssml_synth_spec* spec, const char* dir, int overwrite);

SSML_API ssml_status ssml_dataset_load(const char* audio_dir, const char* tag_file,
                                       const char* split_file, size_t tag_count,
                                       ssml_dataset** out);
/* Corpus directory laid out as written by ssml_synth_write. */
SSML_API ssml_status ssml_dataset_load_dir(const char* dir, size_t tag_count, ssml_dataset** out);
SSML_API void ssml_dataset_destroy(ssml_dataset* dataset);
SSML_API size_t ssml_dataset_size(const ssml_dataset* dataset);
SSML_API size_t ssml_dataset_tag_count(const ssml_dataset* dataset);
SSML_API size_t ssml_dataset_missing_audio(const ssml_dataset* dataset);

/* ---- models and training ------------------------------------------------ */

SSML_API ssml_status ssml_model_load(const char* path, ssml_model** out);
SSML_API ssml_status ssml_model_save(const ssml_model* model, const char* path);
SSML_API void ssml_model_destroy(ssml_model* model);
SSML_API ssml_status ssml_model_dims(const ssml_model* model, size_t* embed_dim,
                                     size_t* tag_count, size_t* excerpt_len);

/* Contrastive pre-training. The config's model keys define the network; its
 * tag_count is replaced by the dataset's. Each epoch produces one log line
 * "epoch=.. train_loss=.. val_loss=.. lr=..". */
SSML_API ssml_status ssml_pretrain(const ssml_dataset* dataset, const ssml_config* config,
                                   ssml_line_fn log, void* user, ssml_model** out);
/* Fine-tuning; `init` must be given when load_pretrain is set. */
SSML_API ssml_status ssml_finetune(const ssml_dataset* dataset, const ssml_config* config,
                                   const ssml_model* init, ssml_line_fn log, void* user,
                                   ssml_model** out);

/* Runs a grid of learning-technique rows ("mtat", "mtg" or a grid file path).
 * `pretrained` may be NULL, in which case it is trained once if needed.
 * `results` receives a header line and one line per row. */
SSML_API ssml_status ssml_run_grid(const ssml_dataset* dataset, const ssml_config* config,
                                   const char* grid, const ssml_model* pretrained,
                                   ssml_line_fn results, ssml_line_fn log, void* user);

/* ---- inference, retrieval and evaluation -------------------------------- */

/* Track-level outputs for one mono buffer: `embedding` has embed_dim entries;
 * `tag_scores` (softmax) and `mean_probs` have tag_count entries and may be
 * NULL. */
SSML_API ssml_status ssml_infer_audio(const ssml_model* model, const float* samples,
                                      size_t count, int sample_rate_hz, float* embedding,
                                      double* tag_scores, double* mean_probs);

/* Embeds every track of `split` ("train", "valid", "test" or "all") and
 * writes the embedding store. */
SSML_API ssml_status ssml_embed(const ssml_model* model, const ssml_dataset* dataset,
                                const char* split, const char* store_path);

/* Top-k retrieval from a store. With `query_id` NULL every track is used as a
 * query. The query itself is excluded from its own results. Each hit is
 * reported as "query_id<TAB>rank<TAB>result_id<TAB>score". */
SSML_API ssml_status ssml_retrieve(const char* store_path, const char* query_id, size_t k,
                                   ssml_line_fn out, void* user);

/* Metrics over `split`. Embeddings come from `store_path` when given,
 * otherwise from `model`; tag metrics need `model` and are NaN without it.
 * `metrics` (may be NULL) receives R@1, R@2, R@4, R@8, ROC, PR. The report
 * is written to `report_path` and the per-tag breakdown to
 * `<report_path>.tags`. */
SSML_API ssml_status ssml_evaluate(const ssml_model* model, const ssml_dataset* dataset,
                                   const char* split, const char* store_path,
                                   const char* report_path, double metrics[6]);

#ifdef __cplusplus
}
#endif

#endif /* SSML_SSML_H_ */
