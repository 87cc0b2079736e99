#ifndef FK_CIM_H
#define FK_CIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result codes. Values 0–5 match the exit codes of the `fk-cim` binary.
 */
typedef enum FkStatus {
  FK_STATUS_OK = 0,
  FK_STATUS_ERROR = 1,
  FK_STATUS_INVALID_INPUT = 2,
  FK_STATUS_CONTOUR_FAILURE = 3,
  FK_STATUS_SINGULAR_STEP = 4,
  FK_STATUS_OVERFLOW = 5,
  FK_STATUS_NULL_POINTER = 6,
  FK_STATUS_BUFFER_TOO_SMALL = 7,
  FK_STATUS_PANIC = 8,
} FkStatus;

typedef enum FkContour {
  FK_CONTOUR_PARABOLIC = 0,
  FK_CONTOUR_HYPERBOLIC = 1,
} FkContour;

/**
 * Opaque solver for one time window.
 */
typedef struct FkSolver FkSolver;

/**
 * Model parameters; field meanings as in the Rust `FkParams`.
 */
typedef struct FkParamsC {
  double p;
  double b;
  double alpha1;
  double alpha2;
  double binv1;
  double binv2;
  double u1;
  double u2;
  double rho;
  double g10;
  double g20;
} FkParamsC;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len` bytes, into `buf`. Returns the full message length
 * including the terminator, or 0 if the last call succeeded.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t fk_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fk_version(void);

/**
 * Writes the default example parameter set to `out`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum FkStatus fk_params_example(struct FkParamsC *out);

/**
 * Checks `params` without building anything.
 *
 * # Safety
 * `params` must be null or point to a valid struct.
 */
enum FkStatus fk_params_validate(const struct FkParamsC *params);

/**
 * Laplace-space solution at `z = re + i·im`; `out` receives
 * `[Re Ĝ₁, Im Ĝ₁, Re Ĝ₂, Im Ĝ₂]`.
 *
 * # Safety
 * `params` must be valid; `out` must hold 4 doubles.
 */
enum FkStatus fk_g_hat(const struct FkParamsC *params, double re, double im, double *out);

/**
 * Builds a validated contour solver for the window `[t0, t1]` with `n`
 * nodes and default shape parameters. On success `*out` owns the handle.
 *
 * # Safety
 * `params` must be valid; `out` must be valid for writes.
 */
enum FkStatus fk_solver_new(const struct FkParamsC *params,
                            enum FkContour contour,
                            size_t n,
                            double t0,
                            double t1,
                            struct FkSolver **out);

/**
 * Releases a solver. Null is ignored.
 *
 * # Safety
 * `solver` must come from [`fk_solver_new`] and not be used afterwards.
 */
void fk_solver_free(struct FkSolver *solver);

/**
 * Evaluates `G₁, G₂` at `len` times.
 *
 * # Safety
 * `solver` must be a live handle; `times`, `g1`, `g2` must hold `len` doubles.
 */
enum FkStatus fk_solver_evaluate(const struct FkSolver *solver,
                                 const double *times,
                                 size_t len,
                                 double *g1,
                                 double *g2);

/**
 * Round-off floor `100 ε e^{Re(z₀) t₁}` of the solver's contour.
 *
 * # Safety
 * `solver` must be a live handle; `out` valid for writes.
 */
enum FkStatus fk_solver_roundoff_floor(const struct FkSolver *solver, double *out);

/**
 * Time-marching solution on `m` uniform steps over `[0, t_end]`. The three
 * buffers receive `m + 1` values each; `len` is their capacity.
 *
 * # Safety
 * `params` must be valid; `t`, `g1`, `g2` must hold `len` doubles.
 */
enum FkStatus fk_tm_solve(const struct FkParamsC *params,
                          double t_end,
                          size_t m,
                          double *t,
                          double *g1,
                          double *g2,
                          size_t len);

/**
 * Mean occupation time of `state` (1 or 2) at ascending `times`, using the
 * transition data of `params` with ρ = 0 and the shared order `alpha`.
 *
 * # Safety
 * `params` must be valid; `times` and `out` must hold `len` doubles.
 */
enum FkStatus fk_occupation(const struct FkParamsC *params,
                            uint8_t state,
                            double eps1,
                            double eps2,
                            double alpha,
                            double lambda,
                            enum FkContour contour,
                            size_t n,
                            const double *times,
                            size_t len,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FK_CIM_H */
