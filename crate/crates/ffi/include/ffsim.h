#ifndef FFSIM_H
#define FFSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FfsimOutcome {
  FFSIM_OUTCOME_SUCCESS = 0,
  FFSIM_OUTCOME_COLLISION_FAIL = 1,
  FFSIM_OUTCOME_TIMEOUT_FIND = 2,
  FFSIM_OUTCOME_TIMEOUT_RETURN = 3,
} FfsimOutcome;

/**
 * Status code returned by every call.
 */
typedef enum FfsimStatus {
  FFSIM_STATUS_OK = 0,
  FFSIM_STATUS_NULL_POINTER = 1,
  FFSIM_STATUS_INVALID_ARGUMENT = 2,
  FFSIM_STATUS_CONFIG_ERROR = 3,
  FFSIM_STATUS_SIM_ERROR = 4,
  /**
   * The simulation has already ended.
   */
  FFSIM_STATUS_FINISHED = 5,
  /**
   * The requested value does not exist for this run.
   */
  FFSIM_STATUS_NOT_AVAILABLE = 6,
  FFSIM_STATUS_PANIC = 7,
} FfsimStatus;

/**
 * Simulation configuration.
 */
typedef struct FfsimConfig FfsimConfig;

/**
 * A finished run.
 */
typedef struct FfsimResult FfsimResult;

/**
 * A simulation that can be stepped tick by tick.
 */
typedef struct FfsimSim FfsimSim;

typedef struct FfsimPose {
  double x;
  double y;
  double theta;
} FfsimPose;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ffsim_last_error(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum FfsimStatus ffsim_config_default(struct FfsimConfig **out);

/**
 * Parses a TOML config. Missing keys take default values.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum FfsimStatus ffsim_config_from_toml(const char *toml, struct FfsimConfig **out);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum FfsimStatus ffsim_config_set_room(struct FfsimConfig *cfg, uint8_t room);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum FfsimStatus ffsim_config_set_seed(struct FfsimConfig *cfg, uint64_t seed);

/**
 * Number of invariant violations in the config; 0 when valid. The
 * messages are joined into the last-error string when nonzero.
 *
 * # Safety
 * `cfg` must be a live config handle; `count` must be writable.
 */
enum FfsimStatus ffsim_config_validate(const struct FfsimConfig *cfg, size_t *count);

/**
 * # Safety
 * `cfg` must be null or a handle from this library, not yet freed.
 */
void ffsim_config_free(struct FfsimConfig *cfg);

/**
 * Runs a whole simulation.
 *
 * # Safety
 * `cfg` must be a live config handle; `out` must be writable.
 */
enum FfsimStatus ffsim_run(const struct FfsimConfig *cfg, struct FfsimResult **out);

/**
 * # Safety
 * `res` must be a live result handle; `out` must be writable.
 */
enum FfsimStatus ffsim_result_outcome(const struct FfsimResult *res, enum FfsimOutcome *out);

/**
 * Time the flame went out. `NotAvailable` if it never did.
 *
 * # Safety
 * `res` must be a live result handle; `out` must be writable.
 */
enum FfsimStatus ffsim_result_time_to_flame(const struct FfsimResult *res, double *out);

/**
 * # Safety
 * `res` must be a live result handle; `out` must be writable.
 */
enum FfsimStatus ffsim_result_total_time(const struct FfsimResult *res, double *out);

/**
 * # Safety
 * `res` must be a live result handle; `out` must be writable.
 */
enum FfsimStatus ffsim_result_trajectory_len(const struct FfsimResult *res, size_t *out);

/**
 * Pose of trajectory row `index`.
 *
 * # Safety
 * `res` must be a live result handle; `out` must be writable.
 */
enum FfsimStatus ffsim_result_trajectory_pose(const struct FfsimResult *res,
                                              size_t index,
                                              struct FfsimPose *out);

/**
 * # Safety
 * `res` must be null or a handle from this library, not yet freed.
 */
void ffsim_result_free(struct FfsimResult *res);

/**
 * # Safety
 * `cfg` must be a live config handle; `out` must be writable.
 */
enum FfsimStatus ffsim_sim_new(const struct FfsimConfig *cfg, struct FfsimSim **out);

/**
 * Advances one tick. `done` is set once the run has ended.
 *
 * # Safety
 * `sim` must be a live simulation handle; `done` must be writable.
 */
enum FfsimStatus ffsim_sim_step(struct FfsimSim *sim, bool *done);

/**
 * # Safety
 * `sim` must be a live simulation handle; `out` must be writable.
 */
enum FfsimStatus ffsim_sim_pose(const struct FfsimSim *sim, struct FfsimPose *out);

/**
 * # Safety
 * `sim` must be a live simulation handle; `out` must be writable.
 */
enum FfsimStatus ffsim_sim_time(const struct FfsimSim *sim, double *out);

/**
 * Consumes the simulation and returns its result so far. The simulation
 * handle is freed even on failure.
 *
 * # Safety
 * `sim` must be a live simulation handle; `out` must be writable.
 */
enum FfsimStatus ffsim_sim_finish(struct FfsimSim *sim, struct FfsimResult **out);

/**
 * # Safety
 * `sim` must be null or a handle from this library, not yet freed.
 */
void ffsim_sim_free(struct FfsimSim *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FFSIM_H */
