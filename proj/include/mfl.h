/* C interface to the multiplicative-function laboratory.  All entry points
 * return MFL_OK or an error code; the message for the most recent failure on
 * the calling thread is available via mfl_last_error(). */
#ifndef MFL_H
#define MFL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MFL_OK 0
#define MFL_ERR_CONFIG 2
#define MFL_ERR_CAPACITY 3
#define MFL_ERR_IO 4
#define MFL_ERR_INTERNAL 5

const char* mfl_version(void);

/* Message of the last failure on this thread; owned by the library. */
const char* mfl_last_error(void);

/* Default worker count for operations run with threads = 0. */
void mfl_set_threads(int n);

/* Opaque multiplicative-function handle built from a family document. */
typedef struct mfl_spec mfl_spec;

int mfl_spec_from_json(const char* json_doc, mfl_spec** out);
int mfl_spec_value(const mfl_spec* spec, uint64_t n, double* re, double* im);
void mfl_spec_free(mfl_spec* spec);

/* Runs one experiment from a JSON config document.  out_path, format,
 * threads and seed override the config when non-null / nonzero.  When the
 * effective output path is nonempty the report is written there atomically.
 * report_json, if non-null, receives the full JSON report (free with
 * mfl_string_free). */
int mfl_run_experiment_json(const char* config_json, const char* out_path, const char* format,
                            int threads, uint64_t seed, char** report_json);

void mfl_string_free(char* s);

/* Builds or reuses the smallest-prime-factor cache under dir; out_path and
 * note (both optional, mfl_string_free) receive the file path and one of
 * "cache hit" / "cache miss" / "rebuilt after corruption". */
int mfl_cache_build(int64_t spf_limit, const char* dir, char** out_path, char** note);

/* Integral over (0,1] of exp(i*beta*x^(-d)) to absolute tolerance tol. */
int mfl_oscillatory_integral(double beta, int d, double tol, double* re, double* im);

#ifdef __cplusplus
}
#endif

#endif /* MFL_H */
