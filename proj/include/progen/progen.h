// Copyright 2026 The Progen Authors. All Rights Reserved.
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
// =============================================================================

/* C interface of the progen library. All functions return a progen_status;
 * on failure a message is available from progen_last_error() on the same
 * thread until the next call. Strings returned through out-parameters are
 * owned by the caller and released with progen_string_free(). */

#ifndef PROGEN_PROGEN_H_
#define PROGEN_PROGEN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PROGEN_API __declspec(dllexport)
#else
#define PROGEN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum progen_status {
  PROGEN_OK = 0,
  PROGEN_ERR_USAGE = 1,    /* bad arguments or configuration */
  PROGEN_ERR_DATA = 2,     /* unreadable, malformed or inconsistent inputs */
  PROGEN_ERR_NUMERIC = 3,  /* non-finite values during training or inference */
  PROGEN_ERR_INTERNAL = 4
} progen_status;

typedef enum progen_phase {
  PROGEN_PHASE_ALL = 0, /* ViLM then LM */
  PROGEN_PHASE_VILM = 1,
  PROGEN_PHASE_LM = 2,
  PROGEN_PHASE_BASELINE = 3 /* single-stage image-to-report model */
} progen_phase;

typedef enum progen_split {
  PROGEN_SPLIT_TRAIN = 0,
  PROGEN_SPLIT_VAL = 1,
  PROGEN_SPLIT_TEST = 2
} progen_split;

typedef struct progen_config progen_config;
typedef struct progen_generator progen_generator;

PROGEN_API const char* progen_version(void);
PROGEN_API const char* progen_last_error(void);
PROGEN_API void progen_string_free(char* s);

/* Run configuration. path == NULL gives the desk preset rooted at ".". */
PROGEN_API progen_status progen_config_load(const char* path, progen_config** out);
PROGEN_API void progen_config_free(progen_config* config);
PROGEN_API progen_status progen_config_set_seed(progen_config* config, uint64_t seed);
PROGEN_API progen_status progen_config_set_beam(progen_config* config, uint32_t beam);
/* Resolved configuration as JSON. */
PROGEN_API progen_status progen_config_to_json(const progen_config* config, char** out);

/* Synthetic corpus (images, annotation.json, lexicon.json) under dir. */
PROGEN_API progen_status progen_synth(const char* dir, uint64_t seed, uint32_t n_train, uint32_t n_val,
                                      uint32_t n_test, uint32_t grid);

/* Writes the concepts file; out_path == NULL uses the configured path. */
PROGEN_API progen_status progen_extract_concepts(const progen_config* config, const char* out_path);

/* progress receives one line per epoch when non-NULL. */
typedef void (*progen_progress_fn)(const char* line, void* user);
PROGEN_API progen_status progen_train(const progen_config* config, progen_phase phase, progen_progress_fn progress,
                                      void* user);

/* Generates reports for a split and writes them as JSON; out_path == NULL
 * writes generated.json (or generated_single.json) in the run directory. */
PROGEN_API progen_status progen_generate(const progen_config* config, int single_stage, progen_split split,
                                         const char* out_path);

/* Scores n generated files (or run directories holding generated.json) against the references of a split and writes the
 * run-averaged metrics JSON to out_path and/or json_out (either may be
 * NULL). references and
 * lexicon may be NULL when config supplies them; config may be NULL when
 * both are given. diff_path, when set, receives the aligned mention diff of
 * the first run. threads == 0 reads PROGEN_THREADS (default 1). */
PROGEN_API progen_status progen_evaluate(const progen_config* config, const char* const* generated, size_t n,
                                         const char* references, const char* lexicon, progen_split split,
                                         const char* out_path, const char* diff_path, uint32_t threads,
                                         char** json_out);

/* Trained two-stage (or single-stage) model held in memory. */
PROGEN_API progen_status progen_generator_open(const char* vilm_ckpt, const char* lm_ckpt, progen_generator** out);
PROGEN_API progen_status progen_generator_open_single(const char* ckpt, progen_generator** out);
PROGEN_API void progen_generator_free(progen_generator* gen);
/* Report for one study of 1 or 2 images (PGM or IMGF). concepts_out may be
 * NULL and is empty for single-stage generators; truncated_out may be NULL. */
PROGEN_API progen_status progen_generator_run(const progen_generator* gen, const char* const* image_paths,
                                              size_t n_images, uint32_t beam, char** report_out,
                                              char** concepts_out, int* truncated_out);

#ifdef __cplusplus
}
#endif

#endif /* PROGEN_PROGEN_H_ */
