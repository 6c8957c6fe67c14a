#ifndef PADYN_H
#define PADYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; `PDYN_STATUS_OK` is zero.
 */
typedef enum PdynStatus {
  PDYN_STATUS_OK = 0,
  PDYN_STATUS_NULL_POINTER = 1,
  PDYN_STATUS_INVALID_UTF8 = 2,
  PDYN_STATUS_PARSE = 3,
  PDYN_STATUS_BAD_PARAMS = 4,
  PDYN_STATUS_PRIME_MISMATCH = 5,
  PDYN_STATUS_WINDOW = 6,
  PDYN_STATUS_PRECISION = 7,
  /**
   * `pdyn_run_json` ran but an asserted invariant failed.
   */
  PDYN_STATUS_INVARIANT_FAILED = 8,
  PDYN_STATUS_PANIC = 9,
  PDYN_STATUS_OTHER = 10,
} PdynStatus;

/**
 * Precision context (ℤ_p or a ℚ_p window).
 */
typedef struct PdynContext PdynContext;

/**
 * A map built from a spec string.
 */
typedef struct PdynMap PdynMap;

/**
 * Truncated p-adic number.
 */
typedef struct PdynPAdic PdynPAdic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *pdyn_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *pdyn_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void pdyn_string_free(char *s);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum PdynStatus pdyn_context_new_zp(uint32_t p, uint32_t n, struct PdynContext **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum PdynStatus pdyn_context_new_qp(uint32_t p,
                                    uint32_t n,
                                    int32_t u_min,
                                    int32_t u_max,
                                    struct PdynContext **out);

/**
 * # Safety
 * `ctx` must be NULL or a handle from `pdyn_context_new_*`, freed once.
 */
void pdyn_context_free(struct PdynContext *ctx);

/**
 * Parses the text form `p:<prime>;u:<exponent>;d:<digits>`.
 *
 * # Safety
 * `s` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PdynStatus pdyn_padic_parse(const char *s, struct PdynPAdic **out);

/**
 * The integer `value` with as many digits as the prime allows.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PdynStatus pdyn_padic_from_i64(uint32_t p, int64_t value, struct PdynPAdic **out);

/**
 * # Safety
 * `x` must be a valid handle and `out` a valid pointer.
 */
enum PdynStatus pdyn_padic_format(const struct PdynPAdic *x, char **out);

/**
 * # Safety
 * `a`, `b` must be valid handles and `out` a valid pointer.
 */
enum PdynStatus pdyn_padic_add(const struct PdynPAdic *a,
                               const struct PdynPAdic *b,
                               struct PdynPAdic **out);

/**
 * # Safety
 * `a`, `b` must be valid handles and `out` a valid pointer.
 */
enum PdynStatus pdyn_padic_sub(const struct PdynPAdic *a,
                               const struct PdynPAdic *b,
                               struct PdynPAdic **out);

/**
 * # Safety
 * `a`, `b` must be valid handles and `out` a valid pointer.
 */
enum PdynStatus pdyn_padic_mul(const struct PdynPAdic *a,
                               const struct PdynPAdic *b,
                               struct PdynPAdic **out);

/**
 * `‖x‖ = p^-k`: writes `k` and clears `is_zero`, or sets `is_zero` when `x`
 * is zero to its precision (then `k` is the precision).
 *
 * # Safety
 * `x` must be a valid handle; `k` and `is_zero` valid pointers.
 */
enum PdynStatus pdyn_padic_norm_exponent(const struct PdynPAdic *x, int32_t *k, bool *is_zero);

/**
 * # Safety
 * `x` must be NULL or a handle from this library, freed once.
 */
void pdyn_padic_free(struct PdynPAdic *x);

/**
 * Builds a map from a spec such as `shift_zp` or `affine(v=3, w=1)`.
 *
 * # Safety
 * `ctx` must be a valid handle, `spec` a NUL-terminated string, `out` a valid pointer.
 */
enum PdynStatus pdyn_map_new(const struct PdynContext *ctx, const char *spec, struct PdynMap **out);

/**
 * # Safety
 * `map`, `x` must be valid handles and `out` a valid pointer.
 */
enum PdynStatus pdyn_map_eval(const struct PdynMap *map,
                              const struct PdynPAdic *x,
                              struct PdynPAdic **out);

/**
 * # Safety
 * `map` must be NULL or a handle from `pdyn_map_new`, freed once.
 */
void pdyn_map_free(struct PdynMap *map);

/**
 * Runs a JSON experiment configuration and writes the JSON report.
 *
 * Returns `PDYN_STATUS_INVARIANT_FAILED` (with the report written) when an
 * asserted invariant fails.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `report` a valid pointer.
 */
enum PdynStatus pdyn_run_json(const char *config, char **report);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PADYN_H */
