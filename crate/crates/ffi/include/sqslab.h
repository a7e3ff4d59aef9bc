#ifndef SQSLAB_H
#define SQSLAB_H

/* Generated by cbindgen from sqslab-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum SqsStatus {
  SQS_STATUS_OK = 0,
  SQS_STATUS_NULL_POINTER = 1,
  SQS_STATUS_INVALID_ARGUMENT = 2,
  SQS_STATUS_DOMAIN_ERROR = 3,
  SQS_STATUS_RESOURCE_LIMIT = 4,
  SQS_STATUS_BUDGET_VIOLATION = 5,
  SQS_STATUS_SESSION_EXHAUSTED = 6,
  SQS_STATUS_PROTOCOL_ERROR = 7,
  SQS_STATUS_CHECK_FAILED = 8,
  SQS_STATUS_NOT_FOUND = 9,
  SQS_STATUS_UTF8_ERROR = 10,
  SQS_STATUS_INTERNAL_ERROR = 11,
} SqsStatus;

// Opaque predicate handle.
typedef struct SqsPredicate SqsPredicate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a predicate from its JSON descriptor, e.g.
// `{"kind":"neg_parity","n":8,"secret_hex":"a5"}`.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum SqsStatus sqslab_predicate_from_json(const char *json, struct SqsPredicate **out);

// Releases a predicate handle. Null is ignored.
//
// # Safety
// `pred` must come from this library and not be freed twice.
void sqslab_predicate_free(struct SqsPredicate *pred);

// Evaluates a predicate over a binary domain at the packed point `x`
// (entry 0 is the most significant bit). Writes 0 or 1.
//
// # Safety
// `pred` and `out` must be valid pointers.
enum SqsStatus sqslab_predicate_eval_bits(const struct SqsPredicate *pred,
                                          uint64_t x,
                                          int32_t *out);

// Evaluates a predicate over a punctured Z_p domain at the given entries.
//
// # Safety
// `entries` must point to `len` readable values; `pred` and `out` must be
// valid pointers.
enum SqsStatus sqslab_predicate_eval_zp(const struct SqsPredicate *pred,
                                        const uint32_t *entries,
                                        size_t len,
                                        int32_t *out);

// Writes the fraction of the domain the predicate maps to 1.
//
// # Safety
// `pred` and `out` must be valid pointers.
enum SqsStatus sqslab_predicate_density(const struct SqsPredicate *pred, double *out);

// Walsh–Hadamard coefficients of a length-2^n table of values, written to
// `coefficients` (same length).
//
// # Safety
// `values` and `coefficients` must point to `len` readable/writable doubles.
enum SqsStatus sqslab_wht(const double *values, double *coefficients, size_t len);

// Least `r > 0` with `a^r = 1 (mod modulus)`.
//
// # Safety
// `out` must be a valid pointer.
enum SqsStatus sqslab_order_of(uint64_t a, uint64_t modulus, uint64_t *out);

// Order candidate recovered from one measurement `y` of a register of size
// `q`. Returns `NotFound` when the sample carries no usable information.
//
// # Safety
// `out` must be a valid pointer.
enum SqsStatus sqslab_continued_fraction_order(uint64_t y,
                                               uint64_t q,
                                               uint64_t modulus,
                                               uint64_t a,
                                               uint64_t *out);

// Runs a batch experiment from its JSON config and returns the summary as a
// JSON string (release with [`sqslab_string_free`]). The CSV report is
// returned too when `out_csv` is non-null.
//
// # Safety
// `config_json` must be a valid NUL-terminated string; `out_summary` must be
// a valid pointer; `out_csv` may be null.
enum SqsStatus sqslab_run_experiment_json(const char *config_json,
                                          char **out_summary,
                                          char **out_csv);

// Runs a named verification suite; the JSON-lines report is written to
// `out_report`. Returns `CheckFailed` when any check fails.
//
// # Safety
// `selector` must be a valid NUL-terminated string and `out_report` a valid
// pointer.
enum SqsStatus sqslab_verify(const char *selector, uint64_t n, uint64_t trials, char **out_report);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void sqslab_string_free(char *s);

// Library version as a static string; do not free.
const char *sqslab_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQSLAB_H */
