#ifndef SECONDGRADE_H
#define SECONDGRADE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgFormulation {
  SG_FORMULATION_VELOCITY = 0,
  SG_FORMULATION_CURL = 1,
} SgFormulation;

typedef enum SgIntegrator {
  SG_INTEGRATOR_IF_RK4 = 0,
  SG_INTEGRATOR_IMEX_EULER = 1,
} SgIntegrator;

typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_POINTER = 1,
  SG_STATUS_INVALID_ARGUMENT = 2,
  SG_STATUS_INVALID_DATA = 3,
  SG_STATUS_BLOW_UP = 4,
  SG_STATUS_CHECKPOINT = 5,
  SG_STATUS_IO = 6,
  SG_STATUS_PANIC = 7,
} SgStatus;

typedef struct SgField SgField;

typedef struct SgGrid SgGrid;

typedef struct SgSimulation SgSimulation;

typedef struct SgSolverParams {
  double alpha;
  double nu;
  double dt;
  double t_end;
  enum SgFormulation formulation;
  enum SgIntegrator integrator;
  double cfl_limit;
  size_t sample_every;
} SgSolverParams;

/**
 * Norms in the integral convention; `grad_l6` is `‖∇u‖_{L⁶}` and `lip` is
 * the largest pointwise Frobenius norm of `∇u`.
 */
typedef struct SgNorms {
  double l2;
  double h1;
  double h2;
  double h3;
  double l3;
  double grad_l6;
  double lip;
} SgNorms;

typedef struct SgCheckpointHeader {
  uint32_t version;
  uint32_t dim;
  uint32_t n;
  double alpha;
  double nu;
  double time;
} SgCheckpointHeader;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sg_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into the library from the same thread.
 */
const char *sg_last_error_message(void);

/**
 * Parameters with the library defaults for everything but the four given.
 */
struct SgSolverParams sg_solver_params_default(double alpha, double nu, double dt, double t_end);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SgStatus sg_grid_new(size_t dim, size_t n, struct SgGrid **out);

/**
 * Collocation points (and Fourier modes) per component.
 *
 * # Safety
 * `grid` must be null or a live grid handle.
 */
size_t sg_grid_len(const struct SgGrid *grid);

/**
 * # Safety
 * `grid` must be null or a handle from [`sg_grid_new`] not yet freed.
 */
void sg_grid_free(struct SgGrid *grid);

/**
 * # Safety
 * `grid` must be a live grid handle and `out` valid for writes.
 */
enum SgStatus sg_field_taylor_green(const struct SgGrid *grid,
                                    double amplitude,
                                    struct SgField **out);

/**
 * Seeded random divergence-free field with `‖u‖_{L²} = amplitude`.
 *
 * # Safety
 * `grid` must be a live grid handle and `out` valid for writes.
 */
enum SgStatus sg_field_random(const struct SgGrid *grid,
                              uint64_t seed,
                              double spectrum_slope,
                              uint32_t k_max,
                              double amplitude,
                              struct SgField **out);

/**
 * Builds a field from physical samples laid out component-major, each
 * component in the grid's row-major point order.
 *
 * # Safety
 * `grid` must be a live grid handle, `data` must point to `len` readable
 * doubles and `out` must be valid for writes.
 */
enum SgStatus sg_field_from_physical(const struct SgGrid *grid,
                                     const double *data,
                                     size_t len,
                                     struct SgField **out);

/**
 * # Safety
 * `field` must be null or a live field handle.
 */
size_t sg_field_ncomp(const struct SgField *field);

/**
 * Writes the physical samples (same layout as [`sg_field_from_physical`]).
 *
 * # Safety
 * `field` must be a live field handle and `buf` must point to `len`
 * writable doubles.
 */
enum SgStatus sg_field_to_physical(const struct SgField *field, double *buf, size_t len);

/**
 * # Safety
 * `field` must be a live field handle and `out` valid for writes.
 */
enum SgStatus sg_field_norms(const struct SgField *field, struct SgNorms *out);

/**
 * # Safety
 * `field` must be null or a handle not yet freed.
 */
void sg_field_free(struct SgField *field);

/**
 * # Safety
 * `field` must be a live field handle and `out` valid for writes.
 */
enum SgStatus sg_lemma1_ratio(const struct SgField *field, double alpha, double *out);

/**
 * Local existence time `ν³/(K(‖u₀‖_{H¹} + √α‖u₀‖_{H²})⁴)`; infinite for
 * the zero field.
 *
 * # Safety
 * `field` must be a live field handle and `out` valid for writes.
 */
enum SgStatus sg_local_time_bound(const struct SgField *field,
                                  double alpha,
                                  double nu,
                                  double k,
                                  double *out);

/**
 * Starts a simulation from `initial` (copied; the caller keeps ownership).
 *
 * # Safety
 * `initial` and `params` must be valid and `out` valid for writes.
 */
enum SgStatus sg_simulation_new(const struct SgField *initial,
                                const struct SgSolverParams *params,
                                struct SgSimulation **out);

/**
 * Advances `steps` time steps. On [`SgStatus::BlowUp`] the simulation keeps
 * the last finite state.
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
enum SgStatus sg_simulation_advance(struct SgSimulation *sim, uint64_t steps);

/**
 * Current time, or NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live simulation handle.
 */
double sg_simulation_time(const struct SgSimulation *sim);

/**
 * `2ν∫₀ᵗ‖∇u‖²` so far, or NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live simulation handle.
 */
double sg_simulation_dissipation(const struct SgSimulation *sim);

/**
 * Copies the current velocity into a new field handle.
 *
 * # Safety
 * `sim` must be a live simulation handle and `out` valid for writes.
 */
enum SgStatus sg_simulation_velocity(const struct SgSimulation *sim, struct SgField **out);

/**
 * # Safety
 * `sim` must be null or a handle not yet freed.
 */
void sg_simulation_free(struct SgSimulation *sim);

/**
 * Writes the current velocity, α, ν and time as a checkpoint.
 *
 * # Safety
 * `sim` must be a live simulation handle and `path` a NUL-terminated
 * UTF-8 string.
 */
enum SgStatus sg_simulation_save(const struct SgSimulation *sim, const char *path);

/**
 * # Safety
 * `field` must be a live field handle and `path` a NUL-terminated UTF-8
 * string.
 */
enum SgStatus sg_checkpoint_save(const struct SgField *field,
                                 const char *path,
                                 double alpha,
                                 double nu,
                                 double time);

/**
 * Loads a checkpoint; `header` may be null.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string, `out` valid for writes
 * and `header` null or valid for writes.
 */
enum SgStatus sg_checkpoint_load(const char *path,
                                 struct SgField **out,
                                 struct SgCheckpointHeader *header);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SECONDGRADE_H */
