#ifndef TODALAB_H
#define TODALAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_NULL_POINTER = 1,
  TL_STATUS_INVALID_UTF8 = 2,
  TL_STATUS_PARSE_ERROR = 3,
  TL_STATUS_DIVISION_BY_ZERO = 4,
  TL_STATUS_INVALID_ARGUMENT = 5,
  TL_STATUS_COMPUTATION_FAILED = 6,
  TL_STATUS_VERIFICATION_FAILED = 7,
  TL_STATUS_PANIC = 8,
} TlStatus;

typedef enum TlBinaryOp {
  TL_BINARY_OP_ADD = 0,
  TL_BINARY_OP_SUB = 1,
  TL_BINARY_OP_MUL = 2,
  TL_BINARY_OP_DIV = 3,
} TlBinaryOp;

/**
 * Opaque exact scalar, a rational function of `u = q^{1/24}` and `Q`.
 */
typedef struct TlScalar TlScalar;

/**
 * Opaque truncated power series in the times.
 */
typedef struct TlSeries TlSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *tl_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void tl_string_free(char *s);

/**
 * Parses a scalar such as `"Q*q^2/(1 - q)"`.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TlStatus tl_scalar_parse(const char *src, struct TlScalar **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum TlStatus tl_scalar_from_int(int64_t n, struct TlScalar **out);

/**
 * `out = a op b`.
 *
 * # Safety
 * `a`, `b` must be live scalar handles and `out` a valid pointer.
 */
enum TlStatus tl_scalar_binary(enum TlBinaryOp op,
                               const struct TlScalar *a,
                               const struct TlScalar *b,
                               struct TlScalar **out);

/**
 * Writes 1 to `out` when the scalars are equal, else 0.
 *
 * # Safety
 * `a`, `b` must be live scalar handles and `out` a valid pointer.
 */
enum TlStatus tl_scalar_equal(const struct TlScalar *a, const struct TlScalar *b, int *out);

/**
 * Canonical text form.
 *
 * # Safety
 * `a` must be a live scalar handle and `out` a valid pointer.
 */
enum TlStatus tl_scalar_to_string(const struct TlScalar *a, char **out);

/**
 * # Safety
 * `a` must come from this library and not have been freed.
 */
void tl_scalar_free(struct TlScalar *a);

/**
 * Skew Schur function `S_{λ/μ}(t)` up to weighted degree `cutoff`. `mu` may be NULL.
 *
 * # Safety
 * `lambda` must be a NUL-terminated string, `mu` NULL or one, `out` a valid pointer.
 */
enum TlStatus tl_series_schur(const char *lambda,
                              const char *mu,
                              uint32_t cutoff,
                              struct TlSeries **out);

/**
 * Melting crystal partition function of `model` (1 or 2) at charge `s`,
 * summed over partitions of weight at most `w`, to degree `d` in the times.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TlStatus tl_series_melting_z(uint8_t model,
                                  int64_t s,
                                  uint32_t w,
                                  uint32_t d,
                                  struct TlSeries **out);

/**
 * # Safety
 * `a`, `b` must be live series handles and `out` a valid pointer.
 */
enum TlStatus tl_series_mul(const struct TlSeries *a,
                            const struct TlSeries *b,
                            struct TlSeries **out);

/**
 * Coefficient of the empty monomial.
 *
 * # Safety
 * `a` must be a live series handle and `out` a valid pointer.
 */
enum TlStatus tl_series_constant_term(const struct TlSeries *a, struct TlScalar **out);

/**
 * # Safety
 * `a` must be a live series handle and `out` a valid pointer.
 */
enum TlStatus tl_series_to_string(const struct TlSeries *a, char **out);

/**
 * # Safety
 * `a` must come from this library and not have been freed.
 */
void tl_series_free(struct TlSeries *a);

/**
 * Runs a JSON job, e.g. `{"command": "verify hirota", "params": {"provider": "cauchy"}}`.
 * The report goes to `out`, the process-style exit code to `exit_code`
 * (0 pass, 1 verification failure, 2 invalid job). A failed verification
 * returns `VerificationFailed` and still fills `out`.
 *
 * # Safety
 * `job` must be a NUL-terminated string; `out` and `exit_code` valid pointers.
 */
enum TlStatus tl_run_command(const char *job, char **out, int *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TODALAB_H */
