#ifndef KBZ_H
#define KBZ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible call.
typedef enum KbzStatus {
  KBZ_STATUS_OK = 0,
  KBZ_STATUS_INVALID_ARGUMENT = 1,
  KBZ_STATUS_INVALID_STATE = 2,
  KBZ_STATUS_INVALID_CONFIG = 3,
  KBZ_STATUS_UNSUPPORTED_SCALE = 4,
  KBZ_STATUS_NO_NOISE_POSSIBLE = 5,
  KBZ_STATUS_FORMAT = 6,
  KBZ_STATUS_PARSE = 7,
  KBZ_STATUS_IO = 8,
  KBZ_STATUS_NULL_POINTER = 9,
  KBZ_STATUS_BUFFER_TOO_SMALL = 10,
  KBZ_STATUS_PANIC = 11,
} KbzStatus;

// Solver settings: method, objective and stopping rule.
typedef struct KbzConfig KbzConfig;

// Dense row-major matrix.
typedef struct KbzMatrix KbzMatrix;

// Summary of a finished solve.
typedef struct KbzSolveInfo {
  uint64_t iterations;
  // 1 when the tolerance was reached, 0 when the iteration cap stopped the run.
  int32_t converged;
  // Relative error against the reference, or NaN without one.
  double final_rel_err;
  double setup_seconds;
  double solve_seconds;
} KbzSolveInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into this library on the same thread.
const char *kbz_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *kbz_version(void);

// Copies `rows * cols` row-major values into a new matrix.
//
// # Safety
// `data` must point to `rows * cols` readable doubles; `out` must be writable.
enum KbzStatus kbz_matrix_new(size_t rows, size_t cols, const double *data, struct KbzMatrix **out);

// # Safety
// `matrix` must be null or a handle from [`kbz_matrix_new`] not yet freed.
void kbz_matrix_free(struct KbzMatrix *matrix);

// # Safety
// `matrix` must be a live handle or null (returns 0).
size_t kbz_matrix_rows(const struct KbzMatrix *matrix);

// # Safety
// `matrix` must be a live handle or null (returns 0).
size_t kbz_matrix_cols(const struct KbzMatrix *matrix);

// Creates a configuration for `method` (e.g. `"arabebk"`). `lambda > 0`
// selects the elastic-net objective, `lambda == 0` the quadratic one.
//
// # Safety
// `method` must be a NUL-terminated string; `out` must be writable.
enum KbzStatus kbz_config_new(const char *method, double lambda, struct KbzConfig **out);

// # Safety
// `config` must be null or a handle from [`kbz_config_new`] not yet freed.
void kbz_config_free(struct KbzConfig *config);

// # Safety
// `config` must be a live handle.
enum KbzStatus kbz_config_set_tau(struct KbzConfig *config, size_t tau);

// # Safety
// `config` must be a live handle.
enum KbzStatus kbz_config_set_deltas(struct KbzConfig *config, double delta_z, double delta_x);

// A tolerance `<= 0` disables tolerance-based stopping.
//
// # Safety
// `config` must be a live handle.
enum KbzStatus kbz_config_set_tol(struct KbzConfig *config, double tol);

// # Safety
// `config` must be a live handle.
enum KbzStatus kbz_config_set_max_iters(struct KbzConfig *config, uint64_t max_iters);

// # Safety
// `config` must be a live handle.
enum KbzStatus kbz_config_set_seed(struct KbzConfig *config, uint64_t seed);

// Solves `A x ~ b`, writing `x` (length `cols`) into `x_out`.
//
// `reference` (length `cols`) may be null; tolerance-based stopping then
// requires the tolerance to be disabled.
//
// # Safety
// All non-null pointers must reference buffers of the stated lengths.
enum KbzStatus kbz_solve(const struct KbzMatrix *matrix,
                         const struct KbzConfig *config,
                         const double *b,
                         size_t b_len,
                         const double *reference,
                         double *x_out,
                         size_t x_len,
                         struct KbzSolveInfo *info);

// Minimum-norm least-squares solution `A^+ b`, written into `x_out`.
//
// # Safety
// All pointers must reference buffers of the stated lengths.
enum KbzStatus kbz_pseudo_inverse_solution(const struct KbzMatrix *matrix,
                                           const double *b,
                                           size_t b_len,
                                           double *x_out,
                                           size_t x_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KBZ_H */
