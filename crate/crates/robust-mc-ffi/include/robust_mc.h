#ifndef ROBUST_MC_H
#define ROBUST_MC_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum RmcRmcStatus {
  RMC_RMC_STATUS_OK = 0,
  RMC_RMC_STATUS_INVALID_ARGUMENT = 1,
  RMC_RMC_STATUS_DIMENSION_MISMATCH = 2,
  RMC_RMC_STATUS_NULL_POINTER = 3,
  RMC_RMC_STATUS_PANIC = 4,
} RmcRmcStatus;

/**
 * Opaque filtering result handle.
 */
typedef struct RmcRmcFilterResult RmcRmcFilterResult;

/**
 * Opaque dense matrix handle.
 */
typedef struct RmcRmcMatrix RmcRmcMatrix;

/**
 * Opaque handle bundling a problem instance: observed coefficients and
 * the basis they are expressed in.
 */
typedef struct RmcRmcProblem RmcRmcProblem;

/**
 * Opaque solver result handle.
 */
typedef struct RmcRmcSolveResult RmcRmcSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Pointer to the message for the most recent error on this thread, or
 * null when the last call succeeded. Valid until the next failing call
 * on the same thread.
 */
const char *rmc_last_error_message(void);

/**
 * Create a matrix from row-major data. On success writes the handle to
 * `out` (free with `rmc_matrix_free`).
 *
 * # Safety
 * `data` must point to `rows * cols` doubles; `out` must be valid.
 */
enum RmcRmcStatus rmc_matrix_create(uintptr_t rows,
                                    uintptr_t cols,
                                    const double *data,
                                    struct RmcRmcMatrix **out);

/**
 * # Safety
 * `matrix` must be a live handle from this library or null.
 */
void rmc_matrix_free(struct RmcRmcMatrix *matrix);

uintptr_t rmc_matrix_rows(const struct RmcRmcMatrix *matrix);

uintptr_t rmc_matrix_cols(const struct RmcRmcMatrix *matrix);

/**
 * Copy the matrix out in row-major order.
 *
 * # Safety
 * `buffer` must hold at least `rows * cols` doubles.
 */
enum RmcRmcStatus rmc_matrix_copy_data(const struct RmcRmcMatrix *matrix,
                                       double *buffer,
                                       uintptr_t len);

/**
 * Build a problem in the identity (entrywise) basis from coefficient
 * triples `(rows_idx[t], cols_idx[t], values[t])`.
 *
 * # Safety
 * The three index/value arrays must each hold `len` elements.
 */
enum RmcRmcStatus rmc_problem_create_identity(uintptr_t m,
                                              uintptr_t n,
                                              const uintptr_t *rows_idx,
                                              const uintptr_t *cols_idx,
                                              const double *values,
                                              uintptr_t len,
                                              struct RmcRmcProblem **out);

/**
 * # Safety
 * `problem` must be a live handle from this library or null.
 */
void rmc_problem_free(struct RmcRmcProblem *problem);

/**
 * The universal regularizer `1/sqrt(max(ln n, 1))`.
 */
double rmc_default_lambda(uintptr_t n);

/**
 * Solve the convex program. `lambda <= 0` selects the default; `tol <= 0`
 * and `max_iter == 0` select the defaults.
 *
 * # Safety
 * `problem` and `out` must be valid.
 */
enum RmcRmcStatus rmc_solve(const struct RmcRmcProblem *problem,
                            double lambda,
                            double tol,
                            uintptr_t max_iter,
                            struct RmcRmcSolveResult **out);

/**
 * # Safety
 * `result` must be a live handle from this library or null.
 */
void rmc_solve_result_free(struct RmcRmcSolveResult *result);

uintptr_t rmc_solve_result_iterations(const struct RmcRmcSolveResult *result);

bool rmc_solve_result_converged(const struct RmcRmcSolveResult *result);

double rmc_solve_result_objective(const struct RmcRmcSolveResult *result);

/**
 * Clone the low-rank part into a fresh matrix handle.
 *
 * # Safety
 * `result` and `out` must be valid.
 */
enum RmcRmcStatus rmc_solve_result_lowrank(const struct RmcRmcSolveResult *result,
                                           struct RmcRmcMatrix **out);

/**
 * Clone the column-sparse part into a fresh matrix handle.
 *
 * # Safety
 * `result` and `out` must be valid.
 */
enum RmcRmcStatus rmc_solve_result_sparse(const struct RmcRmcSolveResult *result,
                                          struct RmcRmcMatrix **out);

/**
 * Run the l2,1 filtering accelerator. `rank == 0` triggers automatic
 * rank estimation.
 *
 * # Safety
 * `problem` and `out` must be valid.
 */
enum RmcRmcStatus rmc_filter(const struct RmcRmcProblem *problem,
                             uintptr_t rank,
                             uint64_t seed,
                             struct RmcRmcFilterResult **out);

/**
 * # Safety
 * `result` must be a live handle from this library or null.
 */
void rmc_filter_result_free(struct RmcRmcFilterResult *result);

uintptr_t rmc_filter_result_rank(const struct RmcRmcFilterResult *result);

/**
 * Copy the per-column outlier flags (0/1) into `buffer`.
 *
 * # Safety
 * `buffer` must hold at least `len` bytes; `len` should be the column
 * count of the problem.
 */
enum RmcRmcStatus rmc_filter_result_flags(const struct RmcRmcFilterResult *result,
                                          uint8_t *buffer,
                                          uintptr_t len);

/**
 * Clone the completed matrix (outlier columns zeroed) into a handle.
 *
 * # Safety
 * `result` and `out` must be valid.
 */
enum RmcRmcStatus rmc_filter_result_completed(const struct RmcRmcFilterResult *result,
                                              struct RmcRmcMatrix **out);

/**
 * `||P_U1 - P_U2||_F` between the column spans of two orthonormal
 * matrices; writes the distance to `out`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum RmcRmcStatus rmc_subspace_distance(const struct RmcRmcMatrix *u1,
                                        const struct RmcRmcMatrix *u2,
                                        double *out);

/**
 * Cluster the columns of a fully observed matrix into k groups through
 * the LRR affinity. Writes one label per column into `labels`.
 *
 * # Safety
 * `labels` must hold at least as many entries as the matrix has columns.
 */
enum RmcRmcStatus rmc_cluster(const struct RmcRmcMatrix *matrix,
                              uintptr_t k,
                              uint64_t seed,
                              uintptr_t *labels,
                              uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUST_MC_H */
