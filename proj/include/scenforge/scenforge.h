/* Copyright 2026 The scenforge Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef SCENFORGE_SCENFORGE_H_
#define SCENFORGE_SCENFORGE_H_

#include <stdint.h>

#if defined(_WIN32)
#define SF_API __declspec(dllexport)
#else
#define SF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_DOMAIN = 1,       /* ran, but no result (e.g. generation or inspection failed) */
  SF_ERR_PRECONDITION = 2, /* inputs outside the contract */
  SF_ERR_USAGE = 3,        /* bad arguments or configuration */
  SF_ERR_IO = 4,           /* missing or unreadable files */
  SF_ERR_PARSE = 5,        /* malformed text input */
  SF_ERR_INTERNAL = 6
} sf_status;

typedef struct sf_map sf_map;
typedef struct sf_abstract sf_abstract;
typedef struct sf_run sf_run;

SF_API const char* sf_version(void);
/* Message of the last failure on the calling thread; empty after success. */
SF_API const char* sf_last_error(void);
SF_API const char* sf_status_name(sf_status s);
/* Frees strings returned through char** out parameters. */
SF_API void sf_string_free(char* s);

SF_API sf_status sf_map_load(const char* path, sf_map** out);
SF_API void sf_map_free(sf_map* m);

SF_API sf_status sf_abstract_load(const char* path, sf_abstract** out);
SF_API void sf_abstract_free(sf_abstract* a);

/* Key frames of a frame directory or flow-field JSON file, as JSON. */
SF_API sf_status sf_extract(const char* input, double alpha, double frame_interval, char** out_json);

/* Scenario program for an abstract scenario (template mode). */
SF_API sf_status sf_synth(const sf_map* map, const sf_abstract* a, uint64_t seed, char** out_program);

/* Feasibility report as JSON; `a` may be NULL to skip semantic equivalence. */
SF_API sf_status sf_inspect(const sf_map* map, const char* program, const sf_abstract* a, char** out_json);

/* Outer and inner search plus minimization; writes violations.jsonl,
 * replays/ and summary.csv under out_dir. `search_config` (TOML path) may be
 * NULL. Returns {"evaluations", "violations"} as JSON. */
SF_API sf_status sf_search(const sf_map* map, const sf_abstract* a, const char* policy, const char* search_config,
                           uint64_t seed, const char* out_dir, char** out_json);

/* Re-runs a .replay file; writes the trace as JSON Lines when trace_path is
 * non-NULL and returns verdicts as JSON. */
SF_API sf_status sf_replay(const sf_map* map, const char* replay_path, const char* trace_path, char** out_json);

/* Pipeline runs over a TOML run config. */
SF_API sf_status sf_run_open(const char* config_path, sf_run** out);
SF_API void sf_run_free(sf_run* r);
SF_API sf_status sf_run_set_seed(sf_run* r, uint64_t seed);
SF_API sf_status sf_run_set_out(sf_run* r, const char* out_dir);
/* Stage: extract, abstract, synth, inspect, search, report or all. */
SF_API sf_status sf_run_stage(sf_run* r, const char* stage);

#ifdef __cplusplus
}
#endif

#endif /* SCENFORGE_SCENFORGE_H_ */
