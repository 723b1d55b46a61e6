#ifndef SERRE_ZEROS_H
#define SERRE_ZEROS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SzStatus {
  SZ_STATUS_OK = 0,
  SZ_STATUS_NULL_POINTER = 1,
  SZ_STATUS_INVALID_UTF8 = 2,
  SZ_STATUS_PARSE = 3,
  SZ_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The input lies outside the hypotheses of the zero-location theorem.
   */
  SZ_STATUS_HYPOTHESIS_FAILED = 5,
  /**
   * A truncated expansion was too short for the requested accuracy.
   */
  SZ_STATUS_NUMERICAL = 6,
  SZ_STATUS_INTERNAL = 7,
  SZ_STATUS_PANIC = 8,
} SzStatus;

/**
 * Opaque handle to a modular form.
 */
typedef struct SzForm SzForm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null. Valid until the next call
 * into the library from the same thread.
 */
const char *sz_last_error(void);

/**
 * Parses a form expression such as `"E4^3 - E6^2"` at `level` with
 * `truncation` terms (0 selects the default).
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum SzStatus sz_form_parse(const char *text,
                            uint32_t level,
                            size_t truncation,
                            struct SzForm **out);

/**
 * # Safety
 * `form` must come from this library and not be used afterwards. Null is ignored.
 */
void sz_form_free(struct SzForm *form);

/**
 * `n`-th iterated Serre derivative as a new form.
 *
 * # Safety
 * `form` must be a live handle; `out` must be writable.
 */
enum SzStatus sz_form_serre(const struct SzForm *form, uint32_t n, struct SzForm **out);

/**
 * # Safety
 * `form` must be a live handle; `out` must be writable.
 */
enum SzStatus sz_form_weight(const struct SzForm *form, int64_t *out);

/**
 * # Safety
 * `form` must be a live handle; `out` must be writable.
 */
enum SzStatus sz_form_level(const struct SzForm *form, uint32_t *out);

/**
 * Exponent of the first stored coefficient.
 *
 * # Safety
 * `form` must be a live handle; `out` must be writable.
 */
enum SzStatus sz_form_valuation(const struct SzForm *form, int64_t *out);

/**
 * Coefficient of `q^n` as a decimal string (`"p/q"` for exact forms).
 *
 * # Safety
 * `form` must be a live handle; `out` must be writable.
 */
enum SzStatus sz_form_coefficient(const struct SzForm *form, int64_t n, char **out);

/**
 * The q-expansion as schema-tagged JSON.
 *
 * # Safety
 * `form` must be a live handle; `out` must be writable.
 */
enum SzStatus sz_form_series_json(const struct SzForm *form, char **out);

/**
 * Scans every boundary arc and audits the zero count; returns the report as
 * JSON. `grid` 0 and `refine_tol` <= 0 select the defaults.
 *
 * # Safety
 * `form` must be a live handle; `out` must be writable.
 */
enum SzStatus sz_scan_zeros_json(const struct SzForm *form,
                                 size_t grid,
                                 double refine_tol,
                                 char **out);

/**
 * Hypothesis check plus audits of `iterations` Serre derivatives as JSON.
 * A form outside the hypotheses still yields a report (verdict
 * `hypothesis-failed`) and status `HypothesisFailed`.
 *
 * # Safety
 * `form` must be a live handle; `out` must be writable.
 */
enum SzStatus sz_audit_json(const struct SzForm *form, uint32_t iterations, char **out);

/**
 * Exact j-polynomial certificate (level 1, exact forms) as JSON. Refusals
 * are reported in the JSON with status `HypothesisFailed`.
 *
 * # Safety
 * `form` must be a live handle; `out` must be writable.
 */
enum SzStatus sz_jpoly_json(const struct SzForm *form, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void sz_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SERRE_ZEROS_H */
