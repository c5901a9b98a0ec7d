#ifndef DNFLOW_H
#define DNFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
typedef enum DnflowStatus {
  DNFLOW_STATUS_OK = 0,
  DNFLOW_STATUS_NULL_POINTER = 1,
  DNFLOW_STATUS_INVALID_UTF8 = 2,
  DNFLOW_STATUS_INVALID_INPUT = 3,
  DNFLOW_STATUS_INVALID_SPEC = 4,
  DNFLOW_STATUS_RANGE = 5,
  DNFLOW_STATUS_NUMERIC = 6,
  DNFLOW_STATUS_INVALID_ASSUMPTION = 7,
  DNFLOW_STATUS_REGIME = 8,
  DNFLOW_STATUS_STIFFNESS = 9,
  DNFLOW_STATUS_SCHEME_FAILURE = 10,
  DNFLOW_STATUS_FIT = 11,
  DNFLOW_STATUS_INVALID_EXPERIMENT = 12,
  DNFLOW_STATUS_IO = 13,
  DNFLOW_STATUS_JSON = 14,
  DNFLOW_STATUS_BUFFER_TOO_SMALL = 15,
  DNFLOW_STATUS_PANIC = 16,
} DnflowStatus;

/**
 * Tabulated geometry of one problem.
 */
typedef struct DnflowBundle DnflowBundle;

/**
 * A solver with its current state.
 */
typedef struct DnflowSimulation DnflowSimulation;

/**
 * Observables of a simulation at its current time.
 */
typedef struct DnflowObservation {
  double t;
  double sup;
  double support_radius;
  double mass;
  double r_max;
} DnflowObservation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next call.
 */
const char *dnflow_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *dnflow_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void dnflow_string_free(char *s);

/**
 * Builds the geometric bundle of a JSON problem configuration.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum DnflowStatus dnflow_bundle_new(const char *config_json, struct DnflowBundle **out);

/**
 * Releases a bundle. Null is ignored.
 *
 * # Safety
 * `bundle` must come from [`dnflow_bundle_new`] and not be freed twice.
 */
void dnflow_bundle_free(struct DnflowBundle *bundle);

/**
 * `V(r)`, the volume of the geodesic ball.
 *
 * # Safety
 * `bundle` must be a live handle; `out` must be writable.
 */
enum DnflowStatus dnflow_bundle_volume(const struct DnflowBundle *bundle, double r, double *out);

/**
 * `V_rho(r)`, the weighted ball volume.
 *
 * # Safety
 * `bundle` must be a live handle; `out` must be writable.
 */
enum DnflowStatus dnflow_bundle_vol_rho(const struct DnflowBundle *bundle, double r, double *out);

/**
 * `psi(r)`.
 *
 * # Safety
 * `bundle` must be a live handle; `out` must be writable.
 */
enum DnflowStatus dnflow_bundle_psi(const struct DnflowBundle *bundle, double r, double *out);

/**
 * `Z(s)`, the inverse of `psi`.
 *
 * # Safety
 * `bundle` must be a live handle; `out` must be writable.
 */
enum DnflowStatus dnflow_bundle_z_tilde(const struct DnflowBundle *bundle, double s, double *out);

/**
 * Regime classification with assumption and lemma reports, as JSON.
 *
 * # Safety
 * `bundle` must be a live handle; `out_json` must be writable.
 */
enum DnflowStatus dnflow_theory_classify(const struct DnflowBundle *bundle, char **out_json);

/**
 * Predicted decay exponent `delta1`.
 *
 * # Safety
 * `bundle` must be a live handle; `out` must be writable.
 */
enum DnflowStatus dnflow_theory_delta1(const struct DnflowBundle *bundle, double *out);

/**
 * Starts a simulation from a bump of radius `r0` and weighted mass `mass`.
 * `solver_json` may be null for the default solver settings.
 *
 * # Safety
 * `bundle` must be a live handle; `solver_json` null or NUL-terminated; `out` writable.
 */
enum DnflowStatus dnflow_simulation_new(const struct DnflowBundle *bundle,
                                        const char *solver_json,
                                        double r0,
                                        double mass,
                                        struct DnflowSimulation **out);

/**
 * Releases a simulation. Null is ignored.
 *
 * # Safety
 * `sim` must come from [`dnflow_simulation_new`] and not be freed twice.
 */
void dnflow_simulation_free(struct DnflowSimulation *sim);

/**
 * One time step, never past `t_limit`; writes the step size to `dt` when non-null.
 *
 * # Safety
 * `sim` must be a live handle; `dt` null or writable.
 */
enum DnflowStatus dnflow_simulation_step(struct DnflowSimulation *sim, double t_limit, double *dt);

/**
 * Advances to `t_end` (grid extension included).
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum DnflowStatus dnflow_simulation_run(struct DnflowSimulation *sim, double t_end);

/**
 * Current observables.
 *
 * # Safety
 * `sim` must be a live handle; `out` writable.
 */
enum DnflowStatus dnflow_simulation_observe(const struct DnflowSimulation *sim,
                                            struct DnflowObservation *out);

/**
 * Copies cell centers and averages into caller buffers of length `len`.
 * With null buffers, only the cell count is written to `cells`.
 *
 * # Safety
 * `sim` must be a live handle; `cells` writable; buffers null or of length `len`.
 */
enum DnflowStatus dnflow_simulation_profile(const struct DnflowSimulation *sim,
                                            double *centers,
                                            double *values,
                                            size_t len,
                                            size_t *cells);

/**
 * Runs a named experiment (`decay`, `fsp`, `universal`, `blowup`, `barenblatt`) and returns the result as JSON.
 *
 * # Safety
 * `kind` and `config_json` must be NUL-terminated; `out_json` writable.
 */
enum DnflowStatus dnflow_experiment_run(const char *kind,
                                        const char *config_json,
                                        char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DNFLOW_H */
