/* Copyright 2026 The tabinv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/*
 * tabinv C API.
 *
 * Every object is an opaque handle created by a tabinv_*_create/_load/_from
 * function and released with the matching tabinv_*_free. Functions return a
 * tabinv_status; on failure tabinv_last_error() describes the problem for the
 * calling thread. Strings returned through char** are owned by the caller and
 * released with tabinv_string_free.
 */

#ifndef TABINV_TABINV_H_
#define TABINV_TABINV_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TABINV_BUILDING_LIBRARY)
#define TABINV_API __declspec(dllexport)
#else
#define TABINV_API __declspec(dllimport)
#endif
#else
#define TABINV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tabinv_status {
  TABINV_OK = 0,
  TABINV_E_INVALID_ARGUMENT = 1,
  TABINV_E_PARSE = 2,
  TABINV_E_INVALID_TABLE = 3,
  TABINV_E_PERMUTATION_SIZE = 4,
  TABINV_E_OUT_OF_RANGE = 5,
  TABINV_E_NO_HIGHLIGHT = 6,
  TABINV_E_INVALID_PMAX = 7,
  TABINV_E_DIMENSION = 8,
  TABINV_E_EMPTY_BATCH = 9,
  TABINV_E_NON_FINITE = 10,
  TABINV_E_LENGTH_MISMATCH = 11,
  TABINV_E_IO = 12,
  TABINV_E_INVARIANT = 13,
  TABINV_E_INTERNAL = 99
} tabinv_status;

typedef enum tabinv_format {
  TABINV_FORMAT_TOTTO = 0,
  TABINV_FORMAT_HITAB = 1,
  TABINV_FORMAT_AGNOSTIC = 2,
  TABINV_FORMAT_INDEXED = 3
} tabinv_format;

typedef struct tabinv_table tabinv_table;
typedef struct tabinv_vocab tabinv_vocab;
typedef struct tabinv_sequence tabinv_sequence;
typedef struct tabinv_model tabinv_model;

/* ------------------------------------------------------------- errors */

TABINV_API const char* tabinv_last_error(void);
TABINV_API const char* tabinv_status_string(tabinv_status status);
TABINV_API void tabinv_string_free(char* s);

/* Accepts "totto", "hitab", "agnostic", "indexed". */
TABINV_API tabinv_status tabinv_format_parse(const char* name,
                                             tabinv_format* out);

/* ------------------------------------------------------------- tables */

TABINV_API tabinv_status tabinv_table_from_json(const char* json,
                                                tabinv_table** out);
TABINV_API tabinv_status tabinv_table_to_json(const tabinv_table* table,
                                              char** out);
TABINV_API void tabinv_table_free(tabinv_table* table);
TABINV_API size_t tabinv_table_rows(const tabinv_table* table);
TABINV_API size_t tabinv_table_cols(const tabinv_table* table);

TABINV_API tabinv_status tabinv_table_transpose(const tabinv_table* table,
                                                tabinv_table** out);
/* perm[i] is the source data row that becomes the i-th data row. */
TABINV_API tabinv_status tabinv_table_shuffle_rows(const tabinv_table* table,
                                                   const size_t* perm,
                                                   size_t n,
                                                   tabinv_table** out);
TABINV_API tabinv_status tabinv_table_shuffle_cols(const tabinv_table* table,
                                                   const size_t* perm,
                                                   size_t n,
                                                   tabinv_table** out);
/* Transpose, then seeded row and column shuffles. */
TABINV_API tabinv_status tabinv_table_perturb(const tabinv_table* table,
                                              uint64_t seed,
                                              tabinv_table** out);
/* Writes 8 handles into out[0..7]; out[0] equals the input. */
TABINV_API tabinv_status tabinv_table_augment(const tabinv_table* table,
                                              uint64_t seed,
                                              tabinv_table* out[8]);
TABINV_API tabinv_status tabinv_table_related(const tabinv_table* table,
                                              size_t row_a, size_t col_a,
                                              size_t row_b, size_t col_b,
                                              int* out);

/* ----------------------------------------------------------- datasets */

typedef struct tabinv_corpus_spec {
  size_t n_tables;
  size_t min_rows;
  size_t max_rows;
  size_t min_cols;
  size_t max_cols;
  int family; /* 0 filmography, 1 career statistics */
  size_t min_highlight;
  size_t max_highlight;
  uint64_t seed;
} tabinv_corpus_spec;

TABINV_API void tabinv_corpus_spec_default(tabinv_corpus_spec* spec);
TABINV_API tabinv_status tabinv_generate_corpus(const tabinv_corpus_spec* spec,
                                                const char* out_path);
/* 8 output lines per input line. */
TABINV_API tabinv_status tabinv_augment_file(const char* in_path,
                                             const char* out_path,
                                             uint64_t seed);
TABINV_API tabinv_status tabinv_perturb_file(const char* in_path,
                                             const char* out_path,
                                             uint64_t seed);
/* Converts public ToTTo JSONL into this library's dataset JSONL. */
TABINV_API tabinv_status tabinv_import_totto_file(const char* in_path,
                                                  const char* out_path);
TABINV_API tabinv_status tabinv_dataset_count(const char* path, size_t* out);

/* --------------------------------------------------------- vocabulary */

TABINV_API tabinv_status tabinv_vocab_from_dataset(const char* dataset_path,
                                                   tabinv_vocab** out);
/* Union of the words of several dataset files. */
TABINV_API tabinv_status tabinv_vocab_from_datasets(const char* const* paths,
                                                    size_t n,
                                                    tabinv_vocab** out);
TABINV_API tabinv_status tabinv_vocab_load(const char* path,
                                           tabinv_vocab** out);
TABINV_API tabinv_status tabinv_vocab_save(const tabinv_vocab* vocab,
                                           const char* path);
TABINV_API size_t tabinv_vocab_size(const tabinv_vocab* vocab);
TABINV_API void tabinv_vocab_free(tabinv_vocab* vocab);

/* ------------------------------------------------------ linearization */

/* max_len 0 means the default of 512. */
TABINV_API tabinv_status tabinv_linearize(const tabinv_table* table,
                                          const tabinv_vocab* vocab,
                                          tabinv_format format,
                                          size_t max_len,
                                          tabinv_sequence** out);
TABINV_API size_t tabinv_sequence_length(const tabinv_sequence* seq);
/* {"tokens": [...], "ids": [...], "field_of": [...], "fields": [...]} */
TABINV_API tabinv_status tabinv_sequence_to_json(const tabinv_sequence* seq,
                                                 char** out);
/* {"n", "allowed" (row-major 0/1), "p" (row-major), "p_max"} */
TABINV_API tabinv_status tabinv_structure_to_json(const tabinv_sequence* seq,
                                                  int p_max, char** out);
TABINV_API void tabinv_sequence_free(tabinv_sequence* seq);

/* -------------------------------------------------------------- model */

typedef struct tabinv_model_config {
  size_t d_model;
  size_t n_heads;
  size_t n_enc_layers;
  size_t n_dec_layers;
  size_t d_ff;
  int p_max;
  int use_structure_mask;
  int use_invariant_relpos;
  size_t max_decode_len;
  uint64_t seed;
} tabinv_model_config;

TABINV_API void tabinv_model_config_default(tabinv_model_config* config);

/* The vocabulary is copied into the model. */
TABINV_API tabinv_status tabinv_model_create(const tabinv_model_config* config,
                                             const tabinv_vocab* vocab,
                                             tabinv_format format,
                                             size_t max_input_len,
                                             tabinv_model** out);
TABINV_API tabinv_status tabinv_model_load(const char* path,
                                           tabinv_model** out);
TABINV_API tabinv_status tabinv_model_save(const tabinv_model* model,
                                           const char* path);
TABINV_API tabinv_status tabinv_model_get_config(const tabinv_model* model,
                                                 tabinv_model_config* out);
TABINV_API tabinv_format tabinv_model_format(const tabinv_model* model);
TABINV_API size_t tabinv_model_parameter_count(const tabinv_model* model);
TABINV_API void tabinv_model_free(tabinv_model* model);

typedef void (*tabinv_progress_fn)(size_t step, double loss, void* user);

typedef struct tabinv_train_options {
  size_t steps;
  size_t batch_size;
  double learning_rate;
  uint64_t seed;
  size_t log_every;
  tabinv_progress_fn progress; /* may be NULL */
  void* progress_user;
} tabinv_train_options;

TABINV_API void tabinv_train_options_default(tabinv_train_options* options);
/* Trains in place on a dataset file; final_loss may be NULL. */
TABINV_API tabinv_status tabinv_model_train(tabinv_model* model,
                                            const char* dataset_path,
                                            const tabinv_train_options* options,
                                            double* final_loss);
/* Mean per-example NLL over a dataset file. */
TABINV_API tabinv_status tabinv_model_loss(const tabinv_model* model,
                                           const char* dataset_path,
                                           double* out);
/* beam 1 is greedy; max_len 0 uses the model's max_decode_len. */
TABINV_API tabinv_status tabinv_model_generate(const tabinv_model* model,
                                               const tabinv_table* table,
                                               size_t beam, size_t max_len,
                                               char** out);
/* One JSON line per example: {"generation", "reference"}. */
TABINV_API tabinv_status tabinv_model_decode_file(const tabinv_model* model,
                                                  const char* dataset_path,
                                                  const char* out_path,
                                                  size_t beam, size_t max_len,
                                                  double* bleu);

/* --------------------------------------------------------- evaluation */

TABINV_API tabinv_status tabinv_bleu4(const char* const* candidates,
                                      const char* const* references,
                                      size_t n, double* out);

typedef struct tabinv_eval_report {
  double bleu_origin;
  double bleu_transform;
  double delta;
  size_t n_examples;
  int equality_asserted;
  size_t mismatches;
} tabinv_eval_report;

/* Decodes the dataset and its perturbed copy. When generations_path is not
 * NULL, writes one JSON line per example with both generations. */
TABINV_API tabinv_status tabinv_eval_robustness(const tabinv_model* model,
                                                const char* dataset_path,
                                                uint64_t seed, size_t beam,
                                                const char* generations_path,
                                                tabinv_eval_report* out);

typedef struct tabinv_ablation_row {
  char name[16];
  tabinv_format format;
  int use_structure_mask;
  int use_invariant_relpos;
  double final_loss;
  tabinv_eval_report report;
} tabinv_ablation_row;

/* Trains and evaluates the three ablation configurations; out must hold
 * 3 rows. */
TABINV_API tabinv_status tabinv_run_ablation(
    const char* train_path, const char* test_path,
    const tabinv_model_config* base, const tabinv_train_options* options,
    uint64_t seed, size_t beam, tabinv_ablation_row out[3]);

#ifdef __cplusplus
}
#endif

#endif /* TABINV_TABINV_H_ */
