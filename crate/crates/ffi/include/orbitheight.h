#ifndef ORBITHEIGHT_H
#define ORBITHEIGHT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by all functions.
 */
typedef enum OhStatus {
  OH_STATUS_OK = 0,
  OH_STATUS_NULL_POINTER = 1,
  OH_STATUS_INVALID_UTF8 = 2,
  OH_STATUS_PARSE_ERROR = 3,
  OH_STATUS_INVALID_ARGUMENT = 4,
  OH_STATUS_RUNTIME_ERROR = 5,
  OH_STATUS_OUT_OF_RANGE = 6,
  OH_STATUS_PANIC = 7,
} OhStatus;

/**
 * A rational self-map of affine space.
 */
typedef struct OhMap OhMap;

/**
 * An eventually periodic subset of the natural numbers.
 */
typedef struct OhSet OhSet;

/**
 * A computed orbit trace with observable values and heights.
 */
typedef struct OhTrace OhTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a
 * success. The pointer stays valid until the next call on this thread.
 */
const char *oh_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void oh_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *oh_version(void);

/**
 * Logarithmic height of a rational given as text, e.g. `"-22/7"`.
 *
 * # Safety
 * `q` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OhStatus oh_height_rational(const char *q, double *out);

/**
 * Parses a map from variable names and one expression per variable.
 *
 * # Safety
 * The arrays must hold `nvars` and `ncomponents` NUL-terminated strings;
 * `out` must be a valid pointer.
 */
enum OhStatus oh_map_new(const char *const *variables,
                         size_t nvars,
                         const char *const *components,
                         size_t ncomponents,
                         struct OhMap **out);

/**
 * # Safety
 * `map` must be null or a handle from [`oh_map_new`] not yet freed.
 */
void oh_map_free(struct OhMap *map);

/**
 * Canonical text form of a map, e.g. `"(2*x*z, y + 1, z + 1)"`.
 *
 * # Safety
 * `map` must be a live handle and `out` a valid pointer.
 */
enum OhStatus oh_map_to_string(const struct OhMap *map, char **out);

/**
 * Iterates `map` from `start` for rows `0..=horizon`, evaluating the
 * observable expression on each point. An early stop is not an error;
 * query it with [`oh_trace_stop_reason`].
 *
 * # Safety
 * `map` must be a live handle, `observable` a NUL-terminated string,
 * `start` an array of `nstart` NUL-terminated rationals, `out` valid.
 */
enum OhStatus oh_orbit_iterate(const struct OhMap *map,
                               const char *observable,
                               const char *const *start,
                               size_t nstart,
                               size_t horizon,
                               struct OhTrace **out);

/**
 * # Safety
 * `trace` must be null or a handle not yet freed.
 */
void oh_trace_free(struct OhTrace *trace);

/**
 * Number of computed rows; 0 for a null handle.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
size_t oh_trace_len(const struct OhTrace *trace);

/**
 * Height of the observable value at row `i`.
 *
 * # Safety
 * `trace` must be a live handle and `out` a valid pointer.
 */
enum OhStatus oh_trace_height(const struct OhTrace *trace, size_t i, double *out);

/**
 * Observable value at row `i` as an exact rational or `"inf"`.
 *
 * # Safety
 * `trace` must be a live handle and `out` a valid pointer.
 */
enum OhStatus oh_trace_value(const struct OhTrace *trace, size_t i, char **out);

/**
 * `"completed"`, `"map-indeterminacy@n"` or `"observable-indeterminacy@n"`.
 *
 * # Safety
 * `trace` must be a live handle and `out` a valid pointer.
 */
enum OhStatus oh_trace_stop_reason(const struct OhTrace *trace, char **out);

/**
 * Trace as CSV with columns `n,point,value,height,ratio`.
 *
 * # Safety
 * `trace` must be a live handle and `out` a valid pointer.
 */
enum OhStatus oh_trace_to_csv(const struct OhTrace *trace, char **out);

/**
 * Number of points of projective `n`-space over Q with multiplicative
 * height at most `bound`; fails if the box exceeds `budget` vectors.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OhStatus oh_schanuel_count(uint32_t n, uint64_t bound, uint64_t budget, uint64_t *out);

/**
 * Parses a set written as `mod m: {r,...} +{added} -{removed}`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OhStatus oh_set_parse(const char *text, struct OhSet **out);

/**
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void oh_set_free(struct OhSet *set);

/**
 * Natural density as an exact fraction string.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum OhStatus oh_set_density(const struct OhSet *set, char **out);

/**
 * Membership test.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum OhStatus oh_set_contains(const struct OhSet *set, uint64_t n, bool *out);

/**
 * The set of shifts `i` with `d(S ∩ (S + i)) > 0`, as a new handle.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum OhStatus oh_set_shift_set(const struct OhSet *set, struct OhSet **out);

/**
 * Canonical text form of a set.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum OhStatus oh_set_to_string(const struct OhSet *set, char **out);

/**
 * Runs a job given as JSON text and returns its CSV and JSON reports.
 * Invalid jobs give `ParseError`, failed runs `RuntimeError`. A run that
 * stops early returns `RuntimeError` and still fills both reports.
 *
 * # Safety
 * `job_json` must be a NUL-terminated string; `csv_out` and `json_out`
 * must be valid pointers.
 */
enum OhStatus oh_job_run(const char *job_json, uint64_t budget, char **csv_out, char **json_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORBITHEIGHT_H */
