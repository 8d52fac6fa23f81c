#ifndef PFA_PFA_H
#define PFA_PFA_H

/* C interface to the forecasting / attack library. Objects are opaque
 * handles; every call returns a status and leaves a thread-local message
 * retrievable with pfa_last_error(). */

#include <stddef.h>
#include <stdint.h>

#if defined(PFA_BUILDING_LIBRARY)
#define PFA_API __attribute__((visibility("default")))
#else
#define PFA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pfa_status {
  PFA_OK = 0,
  PFA_ERR_CONFIG = 2,
  PFA_ERR_DATA = 3,
  PFA_ERR_NUMERIC = 4,
  PFA_ERR_DOMAIN = 5,
  PFA_ERR_DEGENERATE = 6,
  PFA_ERR_UNSUPPORTED = 7,
  PFA_ERR_IO = 8,
  PFA_ERR_INVALID_ARGUMENT = 9,
  PFA_ERR_INTERNAL = 10
} pfa_status;

typedef struct pfa_config pfa_config;
typedef struct pfa_model pfa_model;

/* Receives progress text; may be NULL. */
typedef void (*pfa_log_fn)(const char* text, void* user);

PFA_API const char* pfa_version(void);
PFA_API const char* pfa_last_error(void);
PFA_API const char* pfa_status_name(pfa_status status);
/* 0 ok, 2 config, 3 data, 4 numeric. */
PFA_API int pfa_exit_code(pfa_status status);

PFA_API pfa_status pfa_config_new(pfa_config** out);
PFA_API pfa_status pfa_config_load(const char* path, pfa_config** out);
PFA_API pfa_status pfa_config_set(pfa_config* config, const char* key, const char* value);
/* Copies the value (NUL-terminated) into buf when it fits; *needed gets the
 * full length including the terminator. */
PFA_API pfa_status pfa_config_get(const pfa_config* config, const char* key, char* buf, size_t capacity,
                                  size_t* needed);
PFA_API void pfa_config_free(pfa_config* config);

/* train | forecast | attack | backtest | synth | grad-check */
PFA_API pfa_status pfa_run(const char* command, const pfa_config* config, pfa_log_fn log, void* user);

PFA_API pfa_status pfa_model_random(int layers, int hidden, uint64_t seed, pfa_model** out);
/* mean a * prev + b, fixed scale sigma */
PFA_API pfa_status pfa_model_ar1(double a, double b, double sigma, pfa_model** out);
PFA_API pfa_status pfa_model_load(const char* path, pfa_model** out);
PFA_API pfa_status pfa_model_save(const pfa_model* model, const char* path);
PFA_API pfa_status pfa_model_parameter_count(const pfa_model* model, size_t* out);
PFA_API void pfa_model_free(pfa_model* model);

/* transform: "identity", "scale" or "returns:MU:SIGMA".
 * statistic: e.g. "cum_return:10"; observation: "true", "value:J:V", "ratio:J:V".
 * standard_error is NaN when samples < 2. */
PFA_API pfa_status pfa_expectation(const pfa_model* model, const double* x, size_t n, const char* transform,
                                   const char* statistic, const char* observation, size_t samples, uint64_t seed,
                                   double* estimate, double* standard_error);

/* Gradient of the expectation with respect to a perturbation of x at zero.
 * estimator: "reparametrization" or "score_function". grad receives n values. */
PFA_API pfa_status pfa_gradient(const pfa_model* model, const double* x, size_t n, const char* transform,
                                const char* statistic, const char* observation, const char* estimator,
                                size_t samples, uint64_t seed, double* grad, double* value);

PFA_API pfa_status pfa_weighted_norm(const double* delta, const double* x, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
