#ifndef SKIPSIM_SKIPSIM_H
#define SKIPSIM_SKIPSIM_H

/* C interface to the overlay simulator. Every fallible call returns a
 * skipsim_status; on failure skipsim_last_error() describes what went wrong
 * for the calling thread. Strings returned through char** parameters are
 * owned by the caller and released with skipsim_string_free(). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum skipsim_status {
  SKIPSIM_OK = 0,
  SKIPSIM_ERR_CONFIG = 1,   /* malformed configuration or override */
  SKIPSIM_ERR_CACHE = 2,    /* snapshot store contents are damaged */
  SKIPSIM_ERR_IO = 3,       /* filesystem trouble or missing replay snapshot */
  SKIPSIM_ERR_INTERNAL = 4, /* broken internal invariant */
  SKIPSIM_ERR_ARGUMENT = 5  /* null or out-of-range argument */
} skipsim_status;

typedef struct skipsim_config skipsim_config;
typedef struct skipsim_report skipsim_report;

typedef struct skipsim_run_options {
  const char* store_dir;  /* NULL: "store" */
  const char* out_dir;    /* NULL: report files are not written */
  uint32_t threads;       /* 0: one worker per hardware thread */
  uint32_t committee_k;   /* 0: default committee size (3) */
} skipsim_run_options;

/* Receives one diagnostic line (no trailing newline). May be NULL. */
typedef void (*skipsim_log_fn)(const char* line, void* user_data);

/* Message of the last failing call on this thread; never NULL. */
const char* skipsim_last_error(void);

skipsim_status skipsim_config_parse_text(const char* text, skipsim_config** out);
skipsim_status skipsim_config_parse_file(const char* path, skipsim_config** out);

/* Applies one key/value override. Keys that identify the generated snapshot
 * are rejected with SKIPSIM_ERR_CONFIG. */
skipsim_status skipsim_config_override(skipsim_config* cfg, const char* key, const char* value);

/* Canonical "Key = Value" rendering of the configuration. */
skipsim_status skipsim_config_serialize(const skipsim_config* cfg, char** out_text);
void skipsim_config_free(skipsim_config* cfg);

/* Runs the configured simulation, generating and caching snapshots as
 * needed. When opt->out_dir is set, report.csv and report.json are written
 * there. */
skipsim_status skipsim_run(const skipsim_config* cfg, const skipsim_run_options* opt,
                           skipsim_log_fn log, void* log_user, skipsim_report** out);

/* Like skipsim_run but refuses to generate: every snapshot must already be
 * in the store, and the store is not written to. */
skipsim_status skipsim_replay(const skipsim_config* cfg, const skipsim_run_options* opt,
                              skipsim_log_fn log, void* log_user, skipsim_report** out);

uint32_t skipsim_report_topology_count(const skipsim_report* rep);
uint32_t skipsim_report_cache_hits(const skipsim_report* rep);
uint32_t skipsim_report_generated(const skipsim_report* rep);
double skipsim_report_wall_seconds(const skipsim_report* rep);

/* Per-topology metric value. *out_samples == 0 means the metric has no data
 * (rendered as NA in reports); *out_value is 0 in that case. */
skipsim_status skipsim_report_metric(const skipsim_report* rep, uint32_t topology_index,
                                     const char* metric, double* out_value,
                                     uint64_t* out_samples);

/* Cross-topology aggregate; stat is "mean", "std", "min" or "max".
 * *out_topologies == 0 means no topology had data for the metric. */
skipsim_status skipsim_report_aggregate(const skipsim_report* rep, const char* metric,
                                        const char* stat, double* out_value,
                                        uint64_t* out_topologies);

/* Event-schedule hashes for one topology, as 16-char lowercase hex. The
 * first covers churn and query records only, the second every record. */
skipsim_status skipsim_report_event_hashes(const skipsim_report* rep, uint32_t topology_index,
                                           char** out_churn_query_hash, char** out_full_hash);

skipsim_status skipsim_report_csv(const skipsim_report* rep, char** out_text);
skipsim_status skipsim_report_json(const skipsim_report* rep, char** out_text);
void skipsim_report_free(skipsim_report* rep);

/* One line per stored snapshot set: key hash, key fields and the topology
 * indices present. Empty string when the store is empty or absent. */
skipsim_status skipsim_store_list(const char* store_dir, char** out_text);

/* Recomputes every content hash in the store. *out_problem_count receives
 * the number of problems; out_text the problem lines (empty when clean). */
skipsim_status skipsim_store_verify(const char* store_dir, char** out_text,
                                    uint64_t* out_problem_count);

void skipsim_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SKIPSIM_SKIPSIM_H */
