#ifndef BOTLC_H
#define BOTLC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The first four match the `botlc` exit codes.
 */
typedef enum BotlcStatus {
  BOTLC_STATUS_OK = 0,
  BOTLC_STATUS_INVARIANT_FAILURE = 1,
  BOTLC_STATUS_CONFIG_ERROR = 2,
  BOTLC_STATUS_RUNTIME_ABORT = 3,
  BOTLC_STATUS_NULL_POINTER = 4,
  BOTLC_STATUS_INVALID_UTF8 = 5,
  BOTLC_STATUS_IO = 6,
  BOTLC_STATUS_INDEX_OUT_OF_RANGE = 7,
  BOTLC_STATUS_PANIC = 8,
} BotlcStatus;

typedef struct BotlcScenario BotlcScenario;

typedef struct BotlcTrajectory BotlcTrajectory;

/**
 * One recorded sample, flattened.
 */
typedef struct BotlcSample {
  double t;
  double agent_x;
  double agent_y;
  double target_x;
  double target_y;
  double x_hat_x;
  double x_hat_y;
  double d;
  double d_hat;
  double delta;
  double xtilde_norm;
  double u_x;
  double u_y;
  double theta;
  /**
   * Diagnostic bits, as in the `flags` CSV column.
   */
  uint32_t flags;
} BotlcSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *botlc_version(void);

/**
 * Message of the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next botlc call on the same thread.
 */
const char *botlc_last_error_message(void);

/**
 * Parse and validate a scenario from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BotlcStatus botlc_scenario_from_toml(const char *toml, struct BotlcScenario **out);

/**
 * Load a scenario file, or a bundled scenario by name.
 *
 * # Safety
 * `path_or_name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BotlcStatus botlc_scenario_load(const char *path_or_name, struct BotlcScenario **out);

/**
 * # Safety
 * `scenario` must come from this library and not be freed twice. NULL is ignored.
 */
void botlc_scenario_free(struct BotlcScenario *scenario);

/**
 * Override the horizon of a scenario.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum BotlcStatus botlc_scenario_set_t_end(struct BotlcScenario *scenario, double t_end_s);

/**
 * Simulate a scenario.
 *
 * On `BOTLC_STATUS_RUNTIME_ABORT` the partial trajectory is still stored in
 * `out` and must be freed.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum BotlcStatus botlc_run(const struct BotlcScenario *scenario, struct BotlcTrajectory **out);

/**
 * Run the invariant monitors with the scenario's check settings.
 *
 * Returns `BOTLC_STATUS_OK` when every applicable check passes and
 * `BOTLC_STATUS_INVARIANT_FAILURE` otherwise; the failing checks are listed
 * in the error message.
 *
 * # Safety
 * Both handles must be live.
 */
enum BotlcStatus botlc_check(const struct BotlcScenario *scenario,
                             const struct BotlcTrajectory *traj);

/**
 * Number of samples; 0 for NULL.
 *
 * # Safety
 * `traj` must be a live handle or NULL.
 */
size_t botlc_trajectory_len(const struct BotlcTrajectory *traj);

/**
 * Copy sample `index` into `out`.
 *
 * # Safety
 * `traj` must be a live handle and `out` writable.
 */
enum BotlcStatus botlc_trajectory_sample(const struct BotlcTrajectory *traj,
                                         size_t index,
                                         struct BotlcSample *out);

/**
 * Write the trajectory in the CSV format of `botlc run`.
 *
 * # Safety
 * `traj` must be a live handle and `path` a NUL-terminated string.
 */
enum BotlcStatus botlc_trajectory_write_csv(const struct BotlcTrajectory *traj, const char *path);

/**
 * # Safety
 * `traj` must come from this library and not be freed twice. NULL is ignored.
 */
void botlc_trajectory_free(struct BotlcTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOTLC_H */
