#ifndef MEMCHUA_H
#define MEMCHUA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the nonzero values mirror the command-line exit codes.
 */
typedef enum {
  MEMCHUA_STATUS_OK = 0,
  MEMCHUA_STATUS_NULL_POINTER = 1,
  MEMCHUA_STATUS_INVALID_INPUT = 2,
  MEMCHUA_STATUS_FIT_FAILED = 3,
  MEMCHUA_STATUS_DESIGN_FAILED = 4,
  MEMCHUA_STATUS_RUNTIME = 5,
  MEMCHUA_STATUS_BUFFER_TOO_SMALL = 6,
  MEMCHUA_STATUS_PANIC = 99,
} MemchuaStatus;

typedef enum {
  MEMCHUA_LABEL_FIXED_POINT = 0,
  MEMCHUA_LABEL_PERIODIC = 1,
  MEMCHUA_LABEL_SINGLE_SCROLL = 2,
  MEMCHUA_LABEL_DOUBLE_SCROLL = 3,
  MEMCHUA_LABEL_DIVERGED = 4,
  MEMCHUA_LABEL_INCONCLUSIVE = 5,
} MemchuaLabel;

/**
 * Opaque circuit handle.
 */
typedef struct MemchuaCircuit MemchuaCircuit;

/**
 * Opaque trajectory handle.
 */
typedef struct MemchuaTrajectory MemchuaTrajectory;

typedef struct {
  double v_eq;
  double c1;
  double alpha;
  double beta;
} MemchuaDesignSpec;

typedef struct {
  /**
   * Dormand-Prince with `abs_tol`/`rel_tol` when true, RK4 with `dt` otherwise.
   */
  bool adaptive;
  double dt;
  double abs_tol;
  double rel_tol;
  double t_end;
  double t_transient;
  size_t record_stride;
  /**
   * Stop at the first excursion of `v1` outside the device window.
   */
  bool abort_on_soa;
} MemchuaIntegration;

/**
 * Component values in SI units; `r` and `r_n` are resistances.
 */
typedef struct {
  double c1;
  double c2;
  double l;
  double r;
  double r_n;
} MemchuaComponents;

typedef struct {
  /**
   * 0 for the origin, +1 / -1 for the outer points.
   */
  int32_t label;
  double v1;
  double v2;
  double i_l;
  double eig_re[3];
  double eig_im[3];
  bool stable;
  bool in_window;
} MemchuaEquilibrium;

typedef struct {
  MemchuaLabel label;
  /**
   * -1 negative scroll only, +1 positive only, 2 both, 0 none.
   */
  int32_t scroll_side;
  /**
   * `NaN` when no exponent was supplied.
   */
  double lambda1_dimensionless;
  size_t n_extrema_clusters;
} MemchuaClass;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *memchua_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *memchua_version(void);

MemchuaDesignSpec memchua_design_spec_default(void);

MemchuaIntegration memchua_integration_default(void);

/**
 * Reference device coefficients `p1..p5` (A/V^k) written to `out[0..5]`.
 */
MemchuaStatus memchua_reference_coefficients(double *out);

/**
 * Designs a circuit for a device state given by five coefficients and its
 * SET/STOP voltages. Writes a new handle to `*out`.
 *
 * A design whose post-checks fail still yields a handle but returns
 * `DESIGN_FAILED`; the caller must free it.
 */
MemchuaStatus memchua_circuit_design(const double *coeffs,
                                     double v_set_mag,
                                     double v_stop,
                                     const MemchuaDesignSpec *spec,
                                     MemchuaCircuit **out);

/**
 * Builds a circuit from explicit components and a device window `[v_min, v_max]`.
 */
MemchuaStatus memchua_circuit_from_components(const double *coeffs,
                                              double v_min,
                                              double v_max,
                                              const MemchuaComponents *components,
                                              MemchuaCircuit **out);

MemchuaStatus memchua_circuit_components(const MemchuaCircuit *circuit, MemchuaComponents *out);

void memchua_circuit_free(MemchuaCircuit *circuit);

/**
 * Writes up to `capacity` equilibria to `out` and their total count to `*count`.
 * Returns `BUFFER_TOO_SMALL` when `capacity < *count`.
 */
MemchuaStatus memchua_circuit_equilibria(const MemchuaCircuit *circuit,
                                         MemchuaEquilibrium *out,
                                         size_t capacity,
                                         size_t *count);

/**
 * Integrates from `init[0..3]` = `(v1, v2, iL)`. A trajectory that diverged
 * or was aborted is still returned through `*out`, with status `RUNTIME`.
 */
MemchuaStatus memchua_simulate(const MemchuaCircuit *circuit,
                               const double *init,
                               const MemchuaIntegration *config,
                               MemchuaTrajectory **out);

size_t memchua_trajectory_len(const MemchuaTrajectory *traj);

size_t memchua_trajectory_soa_events(const MemchuaTrajectory *traj);

bool memchua_trajectory_diverged(const MemchuaTrajectory *traj);

/**
 * Copies the recorded samples: `times[k]` and `states[3k..3k+3]`.
 * Either output may be null to skip it.
 */
MemchuaStatus memchua_trajectory_copy(const MemchuaTrajectory *traj,
                                      double *times,
                                      double *states,
                                      size_t capacity);

void memchua_trajectory_free(MemchuaTrajectory *traj);

/**
 * Largest Lyapunov exponent (1/s) from `init`, RK4 with step `dt`.
 */
MemchuaStatus memchua_largest_lyapunov(const MemchuaCircuit *circuit,
                                       const double *init,
                                       double dt,
                                       double t_end,
                                       double t_transient,
                                       double *out_per_second);

/**
 * Classifies a trajectory with default thresholds. Pass `NaN` for
 * `lambda1_per_second` to classify on extrema alone.
 */
MemchuaStatus memchua_classify(const MemchuaCircuit *circuit,
                               const MemchuaTrajectory *traj,
                               double lambda1_per_second,
                               MemchuaClass *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEMCHUA_H */
