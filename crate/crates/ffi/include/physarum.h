#ifndef PHYSARUM_H
#define PHYSARUM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PhysarumStatus {
  PHYSARUM_STATUS_OK = 0,
  PHYSARUM_STATUS_NULL_POINTER = 1,
  PHYSARUM_STATUS_INVALID_ARGUMENT = 2,
  PHYSARUM_STATUS_INVALID_PROBLEM = 3,
  PHYSARUM_STATUS_PARSE = 4,
  PHYSARUM_STATUS_IO = 5,
  PHYSARUM_STATUS_INFEASIBLE = 6,
  PHYSARUM_STATUS_NUMERICAL = 7,
  PHYSARUM_STATUS_TOO_LARGE = 8,
  PHYSARUM_STATUS_STEP_LIMIT = 9,
  PHYSARUM_STATUS_PANIC = 10,
} PhysarumStatus;

/**
 * Opaque problem handle.
 */
typedef struct PhysarumProblem PhysarumProblem;

/**
 * Opaque trajectory handle.
 */
typedef struct PhysarumTrajectory PhysarumTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *physarum_last_error(void);

/**
 * Creates a problem from an `n × m` row-major matrix `a` and vectors `b`
 * (length `n`), `c` and `d` (length `m`).
 *
 * # Safety
 * Array arguments must point to at least the stated number of elements.
 */
enum PhysarumStatus physarum_problem_new(size_t n,
                                         size_t m,
                                         const double *a,
                                         const double *b,
                                         const double *c,
                                         const double *d,
                                         struct PhysarumProblem **out);

/**
 * Reads a problem in the `physarum-lp v1` text format.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum PhysarumStatus physarum_problem_from_file(const char *path, struct PhysarumProblem **out);

/**
 * The two-arc example `x1 + x2 = 1`, `c = (1, 2)`, with reactivities `(d1, d2)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PhysarumStatus physarum_problem_fig1(double d1, double d2, struct PhysarumProblem **out);

/**
 * Shortest-path ladder with parameter `f >= 2` and uniform reactivities.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PhysarumStatus physarum_problem_ladder(uint32_t f, struct PhysarumProblem **out);

/**
 * # Safety
 * `problem` must come from this library and not be freed twice.
 */
void physarum_problem_free(struct PhysarumProblem *problem);

/**
 * Number of constraints; 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t physarum_problem_rows(const struct PhysarumProblem *problem);

/**
 * Number of variables; 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t physarum_problem_cols(const struct PhysarumProblem *problem);

/**
 * Minimum-energy solution `q` (length `m`) at the state `x`, its potentials
 * `p` (length `n`, may be null) and `bᵀp` (may be null).
 *
 * # Safety
 * Buffers must hold the stated number of elements.
 */
enum PhysarumStatus physarum_min_energy(const struct PhysarumProblem *problem,
                                        const double *x,
                                        size_t m,
                                        double *q_out,
                                        double *p_out,
                                        double *btp_out);

/**
 * One forward-Euler step of size `h` from `x`, written to `x_out`.
 *
 * # Safety
 * `x` and `x_out` must hold `m` elements; they may alias.
 */
enum PhysarumStatus physarum_euler_step(const struct PhysarumProblem *problem,
                                        const double *x,
                                        size_t m,
                                        double h,
                                        double *x_out);

/**
 * Exact optimal value by enumeration of basic solutions.
 *
 * # Safety
 * `value` must be a valid pointer.
 */
enum PhysarumStatus physarum_oracle_value(const struct PhysarumProblem *problem, double *value);

/**
 * Integrates from `x0`. `h <= 0` selects the default step size and
 * `max_steps == 0` the default cap. Returns `STEP_LIMIT` (with a valid
 * trajectory in `out`) when the cap is reached before convergence.
 *
 * # Safety
 * `x0` must hold `m` elements and `out` must be a valid pointer.
 */
enum PhysarumStatus physarum_solve(const struct PhysarumProblem *problem,
                                   const double *x0,
                                   size_t m,
                                   double h,
                                   size_t max_steps,
                                   struct PhysarumTrajectory **out);

/**
 * # Safety
 * `trajectory` must come from this library and not be freed twice.
 */
void physarum_trajectory_free(struct PhysarumTrajectory *trajectory);

/**
 * Number of recorded states; 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be null or a live handle.
 */
size_t physarum_trajectory_len(const struct PhysarumTrajectory *trajectory);

/**
 * Number of Euler steps taken; 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be null or a live handle.
 */
size_t physarum_trajectory_steps(const struct PhysarumTrajectory *trajectory);

/**
 * 1 if the stop rule fired, 0 otherwise.
 *
 * # Safety
 * `trajectory` must be null or a live handle.
 */
int32_t physarum_trajectory_converged(const struct PhysarumTrajectory *trajectory);

/**
 * Copies record `index` into `x_out` (length `m`) together with its time,
 * cost and residual (each output pointer may be null).
 *
 * # Safety
 * `x_out` must be null or hold `m` elements.
 */
enum PhysarumStatus physarum_trajectory_record(const struct PhysarumTrajectory *trajectory,
                                               size_t index,
                                               double *x_out,
                                               size_t m,
                                               double *time,
                                               double *cost,
                                               double *residual);

/**
 * Oracle optimum computed alongside the run. Fails with `TOO_LARGE` when
 * the instance was too large to enumerate.
 *
 * # Safety
 * `value` must be a valid pointer.
 */
enum PhysarumStatus physarum_trajectory_oracle_value(const struct PhysarumTrajectory *trajectory,
                                                     double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHYSARUM_H */
