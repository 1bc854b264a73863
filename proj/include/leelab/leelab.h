#ifndef LEELAB_H
#define LEELAB_H

/* C interface to leelab. Every call returns a leelab_status; on failure the
 * message is available from leelab_last_error() on the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * leelab_string_free; handles with their matching *_free function. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LEELAB_API __declspec(dllexport)
#else
#define LEELAB_API __attribute__((visibility("default")))
#endif

typedef enum {
  LEELAB_OK = 0,
  LEELAB_INVALID_ARGUMENT = 1,
  LEELAB_DIMENSION_MISMATCH = 2,
  LEELAB_MALFORMED_FILE = 3,
  LEELAB_JACOBI_VIOLATION = 4,
  LEELAB_NOT_UNIMODULAR = 5,
  LEELAB_NON_POSITIVE_METRIC = 6,
  LEELAB_NOT_NORMALIZED = 7,
  LEELAB_NOT_GAUDUCHON = 8,
  LEELAB_NON_SOLVABLE = 9,
  LEELAB_NO_CONVERGENCE = 10,
  LEELAB_CONVENTION_MISMATCH = 11,
  LEELAB_INTERNAL = 12
} leelab_status;

typedef struct leelab_model leelab_model;
typedef struct leelab_field leelab_field;

LEELAB_API const char* leelab_version(void);
/* snake_case name of a status, e.g. "jacobi_violation". */
LEELAB_API const char* leelab_status_name(int status);
/* Nonzero for statuses caused by the input (as opposed to solver failures). */
LEELAB_API int leelab_status_is_input_error(int status);
LEELAB_API const char* leelab_last_error(void);
/* {"error": {"code", "message"}} for the last failure on this thread. */
LEELAB_API int leelab_last_error_json(char** out);
LEELAB_API void leelab_string_free(char* s);

/* Invariant models. */
LEELAB_API int leelab_model_from_json(const char* text, leelab_model** out);
LEELAB_API int leelab_model_from_file(const char* path, leelab_model** out);
LEELAB_API int leelab_model_inoue(double r, double s, double u_re, double u_im, double c, leelab_model** out);
LEELAB_API int leelab_model_to_json(const leelab_model* model, char** out);
LEELAB_API int leelab_model_report(const leelab_model* model, double tolerance, char** out_json);
LEELAB_API void leelab_model_free(leelab_model* model);

/* Scalar fields on the torus grid with `points` per axis. `spec` is an
 * expression or a CSV path. */
LEELAB_API int leelab_field_parse(int n, int points, const char* spec, leelab_field** out);
LEELAB_API int leelab_field_to_csv(const leelab_field* field, char** out);
LEELAB_API int leelab_field_size(const leelab_field* field, size_t* out);
LEELAB_API int leelab_field_values(const leelab_field* field, double* out, size_t count);
LEELAB_API void leelab_field_free(leelab_field* field);

/* Gauduchon factor of the class e^logfactor Omega_flat. */
LEELAB_API int leelab_solve_gauduchon(const leelab_field* logfactor, char** out_json, leelab_field** out_factor);

/* Distinguished metric for the drift expression over a flat background. */
LEELAB_API int leelab_solve_distinguished(int n, int points, const char* drift, int synthetic, char** out_json,
                                          leelab_field** out_phi);

/* which is one of "g", "f", "a", "r". */
LEELAB_API int leelab_check_el(const char* which, const leelab_field* base, int directions, uint64_t seed,
                               char** out_json);

LEELAB_API int leelab_sweep_inoue(const double* s_values, size_t count, double u_re, double u_im, double c,
                                  char** out_json, char** out_csv);

/* Runs the acceptance suite; *passed is set to 1 when every criterion holds. */
LEELAB_API int leelab_verify(int determinism, char** out_json, int* passed);

#ifdef __cplusplus
}
#endif

#endif
