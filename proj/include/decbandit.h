/* decbandit: deterministic simulator and analysis toolkit for fully
 * decentralized multi-armed bandits on undirected graphs.
 *
 * C interface over the C++ core: opaque handles, integer status codes,
 * strings owned by the library and released with db_string_free(). All entry
 * points are thread-compatible as long as each handle is used by one thread
 * at a time; the error message buffer is thread-local.
 */
#ifndef DECBANDIT_H
#define DECBANDIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum db_status {
    DB_OK = 0,
    DB_ERR_CONFIG = 1,    /* bad usage, config file, or arguments */
    DB_ERR_INVARIANT = 2, /* a structural check failed */
    DB_ERR_RUNTIME = 3    /* I/O or execution failure */
} db_status;

/* An experiment: parsed config with seed resolved and the graph pinned. */
typedef struct db_experiment db_experiment;

/* Last error message for the calling thread; never NULL. */
const char* db_last_error(void);

/* Loads a JSON experiment config. `seed_override` replaces the config seed
 * when `has_seed_override` is nonzero; otherwise the config seed or the
 * DECBANDIT_SEED environment variable is used. */
db_status db_experiment_load_file(const char* path, int has_seed_override,
                                  uint64_t seed_override, db_experiment** out);
db_status db_experiment_load_string(const char* json_text, int has_seed_override,
                                    uint64_t seed_override, db_experiment** out);
void db_experiment_free(db_experiment* experiment);

/* Basic facts about a loaded experiment. */
int db_experiment_node_count(const db_experiment* experiment);
int db_experiment_arm_count(const db_experiment* experiment);
uint64_t db_experiment_seed(const db_experiment* experiment);

/* Toggles that mirror the CLI flags. `name` is one of "invariant_checks",
 * "oracle". */
db_status db_experiment_set_flag(db_experiment* experiment, const char* name, int value);

/* Runs the batch, writes trajectories.csv and summary.json under out_dir
 * (which may be "" to skip files) and returns the summary JSON. */
db_status db_simulate(const db_experiment* experiment, const char* out_dir, int workers,
                      char** summary_json);

/* Runs several experiments that share graph, arms, T, runs and seed, and
 * writes one merged trajectory table with a policy column. */
db_status db_compare(const db_experiment* const* experiments, size_t count,
                     int share_reward_seeds, const char* out_dir, int workers,
                     char** summary_json);

/* Regret-bound calculators tabulated per agent group; returns the CSV. */
db_status db_bounds(const db_experiment* experiment, const char* out_dir, char** table_csv);

/* Structural verification (per-round checks plus the coefficient oracle).
 * Returns DB_OK or DB_ERR_INVARIANT; *report_json is filled either way.
 * inject_fault perturbs one recorded value to demonstrate detection. */
db_status db_verify(const db_experiment* experiment, int override_guard, int inject_fault,
                    const char* out_dir, char** report_json);

void db_string_free(char* text);

/* Numeric kernels, exposed for spot checks. Domain errors return NaN and set
 * the thread-local error message. */
double db_kl_div(double p, double q);
double db_kl_ucb_solve(double z, int64_t n, double budget);

/* Library version, encoded as major*10000 + minor*100 + patch. */
uint32_t db_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DECBANDIT_H */
