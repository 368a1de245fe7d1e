#ifndef AGGPER_H
#define AGGPER_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum AggperStatus {
  AggperStatus_Ok = 0,
  AggperStatus_NullPointer = 1,
  AggperStatus_InvalidArgument = 2,
  AggperStatus_Parse = 3,
  AggperStatus_InvalidModel = 4,
  AggperStatus_Budget = 5,
  AggperStatus_Io = 6,
  AggperStatus_Panic = 7,
} AggperStatus;

typedef enum AggperFormulation {
  AggperFormulation_P0 = 0,
  AggperFormulation_Per = 1,
  AggperFormulation_Agg = 2,
} AggperFormulation;

typedef enum AggperFormat {
  AggperFormat_ConicText = 0,
  AggperFormat_Json = 1,
} AggperFormat;

/**
 * Outcome of a relaxation or MIP solve.
 */
typedef enum AggperSolveStatus {
  AggperSolveStatus_Optimal = 0,
  AggperSolveStatus_Feasible = 1,
  AggperSolveStatus_Infeasible = 2,
  AggperSolveStatus_Unbounded = 3,
  AggperSolveStatus_Limit = 4,
  AggperSolveStatus_NumericalLimit = 5,
} AggperSolveStatus;

/**
 * Opaque compiled-model handle.
 */
typedef struct AggperModel AggperModel;

/**
 * Opaque problem handle.
 */
typedef struct AggperProblem AggperProblem;

typedef struct AggperMipResult {
  int32_t status;
  /**
   * `+inf` without an incumbent.
   */
  double value;
  double bound;
  double root_bound;
  double gap;
  uint64_t nodes;
} AggperMipResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Owned by the library and
 * valid until the next failing call on the same thread.
 */
const char *aggper_last_error(void);

/**
 * Seeded line-cover instance with `t` classes of `n` members.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AggperStatus aggper_gen_lc(uint32_t t, uint32_t n, uint64_t seed, struct AggperProblem **out);

/**
 * Seeded separable quadratic instance with `m` rows.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AggperStatus aggper_gen_sqp(uint32_t t,
                                 uint32_t n,
                                 uint32_t m,
                                 uint64_t seed,
                                 struct AggperProblem **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AggperStatus aggper_problem_from_json(const char *json, struct AggperProblem **out);

/**
 * # Safety
 * `problem` must come from this library; `out` must be a valid pointer.
 */
enum AggperStatus aggper_problem_to_json(const struct AggperProblem *problem, char **out);

/**
 * Number of members summed over classes.
 *
 * # Safety
 * `problem` must come from this library or be null (returns 0).
 */
uint64_t aggper_problem_members(const struct AggperProblem *problem);

/**
 * # Safety
 * `problem` must come from this library or be null.
 */
void aggper_problem_free(struct AggperProblem *problem);

/**
 * # Safety
 * `problem` must come from this library; `out` must be a valid pointer.
 */
enum AggperStatus aggper_compile(const struct AggperProblem *problem,
                                 enum AggperFormulation formulation,
                                 bool relaxed,
                                 struct AggperModel **out);

/**
 * # Safety
 * `model` must come from this library or be null (returns 0).
 */
uint64_t aggper_model_num_vars(const struct AggperModel *model);

/**
 * # Safety
 * `model` must come from this library or be null (returns 0).
 */
uint64_t aggper_model_num_integers(const struct AggperModel *model);

/**
 * Serializes a model. Release the string with [`aggper_string_free`].
 *
 * # Safety
 * `model` must come from this library; `out` must be a valid pointer.
 */
enum AggperStatus aggper_model_emit(const struct AggperModel *model,
                                    enum AggperFormat format,
                                    char **out);

/**
 * # Safety
 * `model` must come from this library or be null.
 */
void aggper_model_free(struct AggperModel *model);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void aggper_string_free(char *s);

/**
 * Solves the continuous relaxation; `bound` receives a valid lower bound.
 *
 * # Safety
 * All pointers must be valid.
 */
enum AggperStatus aggper_solve_relaxation(const struct AggperModel *model,
                                          enum AggperSolveStatus *status,
                                          double *bound);

/**
 * Branch-and-bound with the given relative gap and time limit (seconds,
 * `<= 0` for none).
 *
 * # Safety
 * All pointers must be valid.
 */
enum AggperStatus aggper_solve_mip(const struct AggperModel *model,
                                   double mip_gap,
                                   double time_limit,
                                   struct AggperMipResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGGPER_H */
