/* Copyright 2026 The scenforge Authors
 * SPDX-License-Identifier: Apache-2.0 */

/* Plain C client of the shared library. */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "scenforge/scenforge.h"

static int failures = 0;

#define EXPECT(cond)                                                      \
  do {                                                                    \
    if (!(cond)) {                                                        \
      fprintf(stderr, "%s:%d: expected %s (last error: %s)\n", __FILE__, \
              __LINE__, #cond, sf_last_error());                          \
      ++failures;                                                         \
    }                                                                     \
  } while (0)

static char* read_text(const char* path) {
  FILE* f = fopen(path, "rb");
  if (!f) return NULL;
  fseek(f, 0, SEEK_END);
  long n = ftell(f);
  fseek(f, 0, SEEK_SET);
  char* buf = malloc((size_t)n + 1);
  size_t got = fread(buf, 1, (size_t)n, f);
  buf[got] = '\0';
  fclose(f);
  return buf;
}

int main(int argc, char** argv) {
  if (argc < 3) {
    fprintf(stderr, "usage: test_capi DATA_DIR WORK_DIR\n");
    return 2;
  }
  char map_path[1024], abstract_path[1024], out_dir[1024], replay_path[2048], trace_path[1024], flow[1024];
  snprintf(map_path, sizeof map_path, "%s/maps/fixture_map.json", argv[1]);
  snprintf(abstract_path, sizeof abstract_path, "%s/fixtures/abstract/slow_npc_ahead.json", argv[1]);
  snprintf(flow, sizeof flow, "%s/fixtures/videos/v01_slow_lead/flow.json", argv[1]);
  snprintf(out_dir, sizeof out_dir, "%s/capi_search", argv[2]);
  snprintf(trace_path, sizeof trace_path, "%s/capi_trace.jsonl", argv[2]);

  EXPECT(strcmp(sf_version(), "0.1.0") == 0);
  EXPECT(strcmp(sf_status_name(SF_ERR_PARSE), "parse") == 0);

  /* Argument and input errors map to status codes. */
  sf_map* map = NULL;
  EXPECT(sf_map_load(NULL, &map) == SF_ERR_USAGE);
  EXPECT(strlen(sf_last_error()) > 0);
  EXPECT(sf_map_load("/nonexistent/map.json", &map) == SF_ERR_IO);
  EXPECT(map == NULL);
  EXPECT(sf_map_load(map_path, &map) == SF_OK);
  EXPECT(strlen(sf_last_error()) == 0);

  sf_abstract* a = NULL;
  EXPECT(sf_abstract_load(abstract_path, &a) == SF_OK);

  /* Synthesis is deterministic per seed. */
  char* p1 = NULL;
  char* p2 = NULL;
  EXPECT(sf_synth(map, a, 42, &p1) == SF_OK);
  EXPECT(sf_synth(map, a, 42, &p2) == SF_OK);
  EXPECT(p1 && p2 && strcmp(p1, p2) == 0);
  EXPECT(p1 && strstr(p1, "map \"fixture_map\"") != NULL);
  EXPECT(sf_synth(NULL, a, 42, &p2) == SF_ERR_USAGE);

  char* report = NULL;
  EXPECT(sf_inspect(map, p1, a, &report) == SF_OK);
  EXPECT(report && strstr(report, "\"feasible\": true") && strstr(report, "\"equivalent\": true"));
  sf_string_free(report);
  report = NULL;
  EXPECT(sf_inspect(map, "map \"fixture_map\"\nego car {", NULL, &report) == SF_ERR_PARSE);
  EXPECT(report == NULL);
  sf_string_free(p1);
  sf_string_free(p2);

  char* keys = NULL;
  EXPECT(sf_extract(flow, 0.5, 0.1, &keys) == SF_OK);
  EXPECT(keys && strstr(keys, "\"indices\""));
  sf_string_free(keys);

  /* Search writes replays that reproduce their violations. */
  char* summary = NULL;
  EXPECT(sf_search(map, a, "no-such-policy", NULL, 1, out_dir, &summary) == SF_ERR_USAGE);
  char config[1024];
  snprintf(config, sizeof config, "%s/fixtures/search.toml", argv[1]);
  EXPECT(sf_search(map, a, "lanekeeper-staticbug", config, 1, out_dir, &summary) == SF_OK);
  EXPECT(summary && strstr(summary, "\"evaluations\":40"));
  sf_string_free(summary);
  snprintf(replay_path, sizeof replay_path, "%s/replays/0000.replay", out_dir);
  char* verdicts = NULL;
  EXPECT(sf_replay(map, replay_path, trace_path, &verdicts) == SF_OK);
  EXPECT(verdicts && strstr(verdicts, "\"violated\""));
  sf_string_free(verdicts);
  char* trace = read_text(trace_path);
  EXPECT(trace && strstr(trace, "\"ego\""));
  free(trace);

  /* Pipeline handles. */
  sf_run* run = NULL;
  EXPECT(sf_run_open("/nonexistent/run.toml", &run) == SF_ERR_IO);
  char run_config[1024];
  snprintf(run_config, sizeof run_config, "%s/fixtures/run.toml", argv[1]);
  EXPECT(sf_run_open(run_config, &run) == SF_OK);
  char run_out[1024];
  snprintf(run_out, sizeof run_out, "%s/capi_run", argv[2]);
  EXPECT(sf_run_set_out(run, run_out) == SF_OK);
  EXPECT(sf_run_stage(run, "synth") == SF_ERR_USAGE);
  EXPECT(sf_run_stage(run, "everything") == SF_ERR_USAGE);
  EXPECT(sf_run_stage(run, "extract") == SF_OK);
  sf_run_free(run);
  sf_run_free(NULL);

  sf_abstract_free(a);
  sf_map_free(map);
  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("test_capi: all checks passed\n");
  return failures ? 1 : 0;
}
