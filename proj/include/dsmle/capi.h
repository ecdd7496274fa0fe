/*
 * dsmle C API: maximum likelihood parameter estimation for hidden dynamical
 * systems. Opaque handles plus status codes; the last error message is kept
 * per thread and read with dsmle_last_error().
 *
 * All run functions create a timestamped subdirectory under the configured
 * output directory and write the run's data files plus a manifest there. The
 * created directory path is copied into run_dir_buf (NUL-terminated,
 * truncated to bufsize if needed).
 */
#ifndef DSMLE_CAPI_H
#define DSMLE_CAPI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DSMLE_API __declspec(dllexport)
#else
#define DSMLE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dsmle_status {
    DSMLE_OK = 0,
    DSMLE_ERR_INVALID_ARGUMENT = 1,
    DSMLE_ERR_CONFIG = 2,
    DSMLE_ERR_DATA_FORMAT = 3,
    DSMLE_ERR_IO = 4,
    DSMLE_ERR_NON_PRIMITIVE = 5,
    DSMLE_ERR_EIGEN_FAILURE = 6,
    DSMLE_ERR_TOO_LARGE = 7,
    DSMLE_ERR_UNSUPPORTED = 8,
    DSMLE_ERR_DEPTH_EXCEEDED = 9,
    DSMLE_ERR_ALL_DEGENERATE = 10,
    DSMLE_ERR_INTERNAL = 11
} dsmle_status;

typedef struct dsmle_config dsmle_config;

/* Parse a JSON experiment config from a file or a string. On success *out
 * owns a new handle that must be released with dsmle_config_free. */
DSMLE_API dsmle_status dsmle_config_load_file(const char* path, dsmle_config** out);
DSMLE_API dsmle_status dsmle_config_load_string(const char* json_text, dsmle_config** out);
DSMLE_API void dsmle_config_free(dsmle_config* cfg);

/* Overrides applied after parsing (CLI flags). Threads affect wall time
 * only, never results. */
DSMLE_API dsmle_status dsmle_config_set_seed(dsmle_config* cfg, uint64_t seed);
DSMLE_API dsmle_status dsmle_config_set_threads(dsmle_config* cfg, int threads);
DSMLE_API dsmle_status dsmle_config_set_output_dir(dsmle_config* cfg, const char* dir);

/* Stable hash of the canonicalized config ("fnv1a64:<hex>"). */
DSMLE_API dsmle_status dsmle_config_hash(const dsmle_config* cfg, char* buf, size_t bufsize);

/* Simulate an observation sequence under theta0. */
DSMLE_API dsmle_status dsmle_run_simulate(const dsmle_config* cfg, char* run_dir_buf, size_t bufsize);

/* Normalized log-likelihood surface over the parameter box for the data. */
DSMLE_API dsmle_status dsmle_run_likelihood_surface(const dsmle_config* cfg, const char* data_path,
                                                    char* run_dir_buf, size_t bufsize);

/* Surface plus golden-section refinement; writes theta_hat.json. */
DSMLE_API dsmle_status dsmle_run_mle(const dsmle_config* cfg, const char* data_path,
                                     char* run_dir_buf, size_t bufsize);

/* Consistency sweep over n_list x replications; writes sweep.csv and
 * summary.json. */
DSMLE_API dsmle_status dsmle_run_consistency(const dsmle_config* cfg, char* run_dir_buf,
                                             size_t bufsize);

/* Condition report (ergodicity, integrability, continuity, mixing,
 * identifiability diagnostics). *failures_present is set to 1 when any
 * condition entry has status "fail". */
DSMLE_API dsmle_status dsmle_run_verify_conditions(const dsmle_config* cfg, char* run_dir_buf,
                                                   size_t bufsize, int* failures_present);

/* Message for the most recent failing call on this thread ("" if none). */
DSMLE_API const char* dsmle_last_error(void);

DSMLE_API const char* dsmle_version(void);
DSMLE_API const char* dsmle_status_name(dsmle_status status);

#ifdef __cplusplus
}
#endif

#endif /* DSMLE_CAPI_H */
