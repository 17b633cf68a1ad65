#ifndef CAPROUND_H
#define CAPROUND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CrStatus {
  CR_STATUS_OK = 0,
  CR_STATUS_NULL_ARGUMENT = 1,
  CR_STATUS_PARSE = 2,
  CR_STATUS_INVALID_INSTANCE = 3,
  CR_STATUS_DOMAIN = 4,
  CR_STATUS_INFEASIBLE = 5,
  CR_STATUS_NUMERIC = 6,
  /**
   * A guaranteed bound did not hold; the solution is withheld.
   */
  CR_STATUS_FALSIFIED = 7,
  CR_STATUS_IO = 8,
  /**
   * An internal panic was caught at the boundary.
   */
  CR_STATUS_PANIC = 9,
} CrStatus;

/**
 * Problem selector for [`cr_solve`] and [`cr_instance_generate`].
 */
typedef enum CrProblem {
  CR_PROBLEM_CKM = 0,
  CR_PROBLEM_CFLP = 1,
  CR_PROBLEM_CKFLP = 2,
} CrProblem;

/**
 * Opaque instance handle.
 */
typedef struct CrInstance CrInstance;

/**
 * Opaque solution handle.
 */
typedef struct CrSolution CrSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next failing call.
 */
const char *cr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cr_version(void);

/**
 * Loads an instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CrStatus cr_instance_load(const char *path, struct CrInstance **out);

/**
 * Parses an instance from text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CrStatus cr_instance_parse(const char *text, struct CrInstance **out);

/**
 * Generates a random Euclidean instance with default cost range and side constraint.
 * `problem` is a [`CrProblem`] value.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CrStatus cr_instance_generate(int problem,
                                   size_t n_facilities,
                                   size_t n_clients,
                                   uint64_t capacity,
                                   uint64_t seed,
                                   struct CrInstance **out);

/**
 * Number of facilities, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t cr_instance_n_facilities(const struct CrInstance *inst);

/**
 * Number of clients, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t cr_instance_n_clients(const struct CrInstance *inst);

/**
 * Releases an instance. Null is ignored.
 *
 * # Safety
 * `inst` must be null or a handle not yet freed.
 */
void cr_instance_free(struct CrInstance *inst);

/**
 * Rounds `inst` for `problem` (a [`CrProblem`] value) with slack `eps`. `k` is only read for
 * k-facility location; `integral` non-zero also computes an integral client assignment.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
enum CrStatus cr_solve(const struct CrInstance *inst,
                       int problem,
                       double eps,
                       size_t k,
                       int integral,
                       struct CrSolution **out);

/**
 * Objective value of the rounded solution, NaN for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
double cr_solution_cost(const struct CrSolution *s);

/**
 * Optimal value of the LP relaxation the bounds refer to, NaN for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
double cr_solution_lp_opt(const struct CrSolution *s);

/**
 * Largest facility load divided by the capacity, NaN for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
double cr_solution_max_load_over_u(const struct CrSolution *s);

/**
 * Number of open facilities, 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t cr_solution_open_count(const struct CrSolution *s);

/**
 * Copies up to `len` open facility ids into `buf`; `*written` receives the number copied.
 *
 * # Safety
 * `s` must be a live handle, `buf` valid for `len` writes and `written` a valid pointer.
 */
enum CrStatus cr_solution_open(const struct CrSolution *s,
                               size_t *buf,
                               size_t len,
                               size_t *written);

/**
 * 1 when the budget (or cardinality), capacity and cost verdicts all hold, else 0.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
int cr_solution_ok(const struct CrSolution *s);

/**
 * Metrics CSV (header plus one row) for the solution, labelled `name`.
 *
 * # Safety
 * `s` must be a live handle, `name` a NUL-terminated string and `out` a valid pointer.
 */
enum CrStatus cr_solution_metrics_csv(const struct CrSolution *s, const char *name, char **out);

/**
 * Run manifest as JSON.
 *
 * # Safety
 * `s` must be a live handle and `out` a valid pointer.
 */
enum CrStatus cr_solution_manifest_json(const struct CrSolution *s, char **out);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void cr_solution_free(struct CrSolution *s);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `p` must be null or a string obtained from this library and not yet freed.
 */
void cr_string_free(char *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAPROUND_H */
