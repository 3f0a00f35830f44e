/* C interface to the dualgfl simulator.
 *
 * Every call returns a dgfl_status. On failure the message is available from
 * dgfl_last_error() on the same thread until the next failing call. Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with dgfl_string_free.
 */
#ifndef DUALGFL_DUALGFL_H
#define DUALGFL_DUALGFL_H

#include <stddef.h>
#include <stdint.h>

#if defined(DGFL_BUILDING)
#define DGFL_API __attribute__((visibility("default")))
#else
#define DGFL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dgfl_status {
  DGFL_OK = 0,
  DGFL_ERR_CONFIG = 1,           /* invalid configuration value or document */
  DGFL_ERR_RUNTIME = 2,          /* numerical or internal failure */
  DGFL_ERR_INVALID_ARGUMENT = 3, /* null handle or out-of-range argument */
  DGFL_ERR_INFEASIBLE = 4,       /* no feasible partition or link */
  DGFL_ERR_IO = 5                /* file system failure */
} dgfl_status;

typedef struct dgfl_config dgfl_config;
typedef struct dgfl_metrics dgfl_metrics;
typedef struct dgfl_experiment dgfl_experiment;

DGFL_API const char* dgfl_version(void);
DGFL_API const char* dgfl_last_error(void);
/* Key named by the last DGFL_ERR_CONFIG on this thread, or "". */
DGFL_API const char* dgfl_last_error_key(void);
DGFL_API void dgfl_string_free(char* s);

/* Configuration. */
DGFL_API dgfl_status dgfl_config_default(dgfl_config** out);
DGFL_API dgfl_status dgfl_config_load(const char* path, dgfl_config** out);
DGFL_API dgfl_status dgfl_config_parse(const char* document, dgfl_config** out);
DGFL_API void dgfl_config_free(dgfl_config* config);
DGFL_API dgfl_status dgfl_config_set(dgfl_config* config, const char* key, const char* value);
DGFL_API dgfl_status dgfl_config_get(const dgfl_config* config, const char* key, char** out);
DGFL_API dgfl_status dgfl_config_validate(const dgfl_config* config);
DGFL_API dgfl_status dgfl_config_emit(const dgfl_config* config, char** out);

/* Single simulation run. */
DGFL_API dgfl_status dgfl_simulate(const dgfl_config* config, dgfl_metrics** out);
DGFL_API void dgfl_metrics_free(dgfl_metrics* metrics);
DGFL_API dgfl_status dgfl_metrics_rounds(const dgfl_metrics* metrics, size_t* out);
/* Column of the metrics CSV (e.g. "total_score") at round `round`. */
DGFL_API dgfl_status dgfl_metrics_value(const dgfl_metrics* metrics, size_t round, const char* column,
                                        double* out);
DGFL_API dgfl_status dgfl_metrics_cohort_size(const dgfl_metrics* metrics, int* out);
DGFL_API dgfl_status dgfl_metrics_csv(const dgfl_metrics* metrics, char** out);

/* JSON entry points. */
DGFL_API dgfl_status dgfl_topology_generate(const dgfl_config* config, char** out_json);
/* Instance: {"n_servers", "capacity", "data_sizes", "profiles"}; result maps
 * server id to its sorted clients. */
DGFL_API dgfl_status dgfl_pop_solve(const char* instance_json, uint64_t seed, char** out_partition_json);
/* Fixture: {"K", "M", "E_max", "alpha", "bids": [[Q, P, E], ...]}; algorithm is
 * "greedy" or "exact". */
DGFL_API dgfl_status dgfl_auction_select(const char* fixture_json, const char* algorithm, char** out_outcome_json);

/* Experiment sweeps. */
DGFL_API dgfl_status dgfl_experiment_create(const dgfl_config* base, dgfl_experiment** out);
DGFL_API void dgfl_experiment_free(dgfl_experiment* experiment);
DGFL_API dgfl_status dgfl_experiment_add_seed(dgfl_experiment* experiment, uint64_t seed);
DGFL_API dgfl_status dgfl_experiment_add_method(dgfl_experiment* experiment, const char* method);
DGFL_API dgfl_status dgfl_experiment_set_out(dgfl_experiment* experiment, const char* dir);
/* "capacity=6,8,10,15" */
DGFL_API dgfl_status dgfl_experiment_set_ablation(dgfl_experiment* experiment, const char* spec);
/* Writes every output file; `out_files` (optional) receives the count. */
DGFL_API dgfl_status dgfl_experiment_run(dgfl_experiment* experiment, size_t* out_files);

#ifdef __cplusplus
}
#endif

#endif /* DUALGFL_DUALGFL_H */
