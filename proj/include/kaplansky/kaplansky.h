/*
 * C interface to the kaplansky library.
 *
 * Inputs are JSON documents tagged "schema": "kaplansky/v1"; they are parsed
 * into opaque handles. Reports come back as NUL-terminated JSON strings owned
 * by the caller and released with kp_string_free. Every function returns a
 * kp_status; on failure kp_last_error() describes the problem for the
 * calling thread.
 */
#ifndef KAPLANSKY_H
#define KAPLANSKY_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(KAPLANSKY_BUILDING)
#    define KP_API __declspec(dllexport)
#  else
#    define KP_API __declspec(dllimport)
#  endif
#else
#  define KP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kp_status {
  KP_OK = 0,
  KP_ERR_INVALID_ARGUMENT = 1,
  KP_ERR_PARSE = 2,
  KP_ERR_SCHEMA = 3,
  KP_ERR_DIMENSION = 4,
  KP_ERR_NON_FINITE = 5,
  KP_ERR_NOT_SELFADJOINT = 6,
  KP_ERR_NOT_POSITIVE = 7,
  KP_ERR_NOT_PROJECTION = 8,
  KP_ERR_NOT_REAL = 9,
  KP_ERR_INVALID_PARTITION = 10,
  KP_ERR_MALFORMED_PARTS = 11,
  KP_ERR_NOT_SOLVABLE = 12,
  KP_ERR_INCONSISTENT = 13,
  KP_ERR_INTERNAL = 14
} kp_status;

typedef enum kp_document_kind {
  KP_DOC_UNKNOWN = 0,
  KP_DOC_KERNEL = 1,
  KP_DOC_MATRIX_FIELD = 2,
  KP_DOC_STEP_FUNCTION = 3,
  KP_DOC_SPECTRAL_DECOMPOSITION = 4,
  KP_DOC_DIAGONAL_FORM = 5
} kp_document_kind;

typedef struct kp_config {
  double rank_tol;     /* default 1e-10 */
  double solve_tol;    /* default 1e-8 */
  double equality_tol; /* default 1e-12 */
  size_t parallelism;  /* 0 = hardware concurrency */
  int text_output;     /* recorded in reports; 0 = json, 1 = text */
} kp_config;

typedef struct kp_kernel kp_kernel;
typedef struct kp_field kp_field;
typedef struct kp_stepfn kp_stepfn;

KP_API const char* kp_version(void);
KP_API const char* kp_status_string(kp_status status);
/* Message for the most recent failure on this thread ("" if none). */
KP_API const char* kp_last_error(void);

KP_API kp_config kp_config_default(void);

KP_API void kp_string_free(char* str);

/* Classifies a document by its keys without fully validating it. */
KP_API kp_status kp_document_kind_of(const char* json, kp_document_kind* kind);

KP_API kp_status kp_kernel_parse(const char* json, kp_kernel** out);
KP_API void kp_kernel_free(kp_kernel* kernel);
KP_API size_t kp_kernel_atom_count(const kp_kernel* kernel);
KP_API size_t kp_kernel_grid_size(const kp_kernel* kernel);

KP_API kp_status kp_field_parse(const char* json, kp_field** out);
KP_API void kp_field_free(kp_field* field);

KP_API kp_status kp_stepfn_parse(const char* json, kp_stepfn** out);
KP_API void kp_stepfn_free(kp_stepfn* fn);

/* Validation report; *valid is 1 iff the kernel is admissible. */
KP_API kp_status kp_kernel_validate(const kp_kernel* kernel, const kp_config* config, char** report, int* valid);

/* Spectral decomposition export of a self-adjoint kernel. */
KP_API kp_status kp_kernel_decompose(const kp_kernel* kernel, const kp_config* config, char** report);

/* Solvability report; *solvable is 1 when a witness exists. Returns
 * KP_ERR_INCONSISTENT when the witness fails its residual bound. */
KP_API kp_status kp_kernel_solve(const kp_kernel* kernel, const kp_stepfn* lambda, const kp_config* config,
                                 char** report, int* solvable);

/* Central diagonal form with unitary and diagonal factors. */
KP_API kp_status kp_field_diagonalize(const kp_field* field, const kp_config* config, char** report);

/* Rebuilds the operator from an exported decomposition and returns the
 * module operator norm of the difference to the kernel's operator. */
KP_API kp_status kp_decomposition_residual(const char* decomposition_json, const kp_kernel* kernel,
                                           double* residual);
KP_API kp_status kp_diagonal_form_residual(const char* form_json, const kp_field* field, double* residual);

#ifdef __cplusplus
}
#endif

#endif /* KAPLANSKY_H */
