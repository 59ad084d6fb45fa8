#ifndef RROR_H
#define RROR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define RROR_API __attribute__((visibility("default")))
#else
#define RROR_API
#endif

/* Status codes double as CLI exit codes. ESTIMATION covers singular designs,
   non-convergence and domain failures; INPUT covers malformed files, options
   and restrictions. */
typedef enum {
  RROR_OK = 0,
  RROR_ERR_ESTIMATION = 1,
  RROR_ERR_INPUT = 2
} rror_status;

typedef struct rror_public_data rror_public_data;
typedef struct rror_private_data rror_private_data;
typedef struct rror_report rror_report;

/* Message of the last failing call on this thread; "" after a success. */
RROR_API const char* rror_last_error(void);
RROR_API const char* rror_version(void);

/* "sha256:<hex>" of a file's bytes, written to out (at least 72 bytes). */
RROR_API rror_status rror_file_sha256(const char* path, char* out, size_t out_len);

/* Column lists are comma-separated names; NULL or "" means none.
   dividend_column / div_to_book_column may be NULL for a missing column. */
RROR_API rror_status rror_public_load(const char* path, const char* price_column,
                                      const char* dividend_column, const char* covariates,
                                      const char* label_column, rror_public_data** out);
RROR_API rror_status rror_private_load(const char* path, const char* growth_column,
                                       const char* div_to_book_column, const char* covariates,
                                       const char* label_column, rror_private_data** out);
RROR_API int64_t rror_public_periods(const rror_public_data* data);
RROR_API int64_t rror_private_periods(const rror_private_data* data);
RROR_API int rror_private_paying(const rror_private_data* data);
RROR_API void rror_public_free(rror_public_data* data);
RROR_API void rror_private_free(rror_private_data* data);

RROR_API rror_status rror_estimate_public(const rror_public_data* data, double alpha, rror_report** out);
RROR_API rror_status rror_estimate_private(const rror_private_data* data, double alpha, rror_report** out);

/* stats: comma-separated subset of f,t,lr,w,lm; NULL or "" means all. */
RROR_API rror_status rror_test_public(const rror_public_data* data, const char* restriction,
                                      const char* stats, rror_report** out);
RROR_API rror_status rror_test_private(const rror_private_data* data, const char* restriction,
                                       const char* stats, rror_report** out);

typedef struct {
  int regimes;
  double tol;
  int max_iter;
  int max_restarts;
  uint64_t seed;
} rror_regime_options;
RROR_API void rror_regime_options_default(rror_regime_options* opt);
RROR_API rror_status rror_regimes_public(const rror_public_data* data, const rror_regime_options* opt,
                                         rror_report** out);
RROR_API rror_status rror_regimes_private(const rror_private_data* data, const rror_regime_options* opt,
                                          rror_report** out);

/* beta0 may be NULL (zero prior mean); otherwise beta0_len must match the model. */
typedef struct {
  size_t draws;
  size_t burn_in;
  uint64_t seed;
  const double* beta0;
  size_t beta0_len;
  double b0_scale;
  double nu0;
  double lambda0;
} rror_bayes_options;
RROR_API void rror_bayes_options_default(rror_bayes_options* opt);
RROR_API rror_status rror_bayes_public(const rror_public_data* data, const rror_bayes_options* opt,
                                       rror_report** out);
RROR_API rror_status rror_bayes_private(const rror_private_data* data, const rror_bayes_options* opt,
                                        rror_report** out);

/* NaN (or k == NULL) leaves a starting value at its default. fixed is a
   comma-separated subset of k,phi,sigma_u,sigma_v,initial. future may be NULL
   when horizon is 0. */
typedef struct {
  double tol;
  int max_iter;
  const char* fixed;
  const double* k;
  size_t k_len;
  double phi0;
  double phi1;
  double mu0;
  double sigma0_sq;
  double sigma_u_sq;
  double sigma_v_sq;
  int horizon;
  const rror_private_data* future;
} rror_kalman_options;
RROR_API void rror_kalman_options_default(rror_kalman_options* opt);
RROR_API rror_status rror_kalman(const rror_private_data* data, const rror_kalman_options* opt,
                                 rror_report** out);

/* config_json: simulation configuration object, see schemas/simulate_config.schema.json. */
RROR_API rror_status rror_simulate(const char* config_json, rror_report** out);

/* Result object alone, without the manifest. Owned by the report. */
RROR_API const char* rror_report_json(const rror_report* rep);
RROR_API size_t rror_report_series_count(const rror_report* rep);
RROR_API const char* rror_report_series_name(const rror_report* rep, size_t i);
RROR_API const char* rror_report_series_csv(const rror_report* rep, size_t i);
RROR_API const char* rror_report_digest(const rror_report* rep);

/* Wraps the result with a manifest. manifest_json holds "inputs" (array),
   "options" (object) and optionally "seed"; version and output_digest are
   filled in. The returned string is owned by the report and stays valid until
   the next finalize call or rror_report_free. */
RROR_API rror_status rror_report_finalize(rror_report* rep, const char* command, const char* manifest_json,
                                          const char** out);
RROR_API void rror_report_free(rror_report* rep);

#ifdef __cplusplus
}
#endif

#endif
