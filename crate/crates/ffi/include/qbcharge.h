/* SPDX-License-Identifier: Apache-2.0 */

#ifndef QBCHARGE_H
#define QBCHARGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QbStatus {
  QB_STATUS_OK = 0,
  QB_STATUS_IO = 1,
  QB_STATUS_INVALID_ARGUMENT = 2,
  QB_STATUS_INTEGRATION = 3,
  QB_STATUS_CAPACITY = 4,
  QB_STATUS_NULL_POINTER = 5,
  QB_STATUS_PANIC = 6,
} QbStatus;

typedef enum QbMethod {
  QB_METHOD_EXACT = 0,
  QB_METHOD_MEANFIELD = 1,
} QbMethod;

/*
 Opaque scenario handle.
 */
typedef struct QbScenario QbScenario;

/*
 Opaque trajectory handle.
 */
typedef struct QbTrajectory QbTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *qb_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *qb_version(void);

/*
 Charger of `n_charger` spins and `n_batteries` batteries of
 `battery_size` spins each; charger excited, batteries ground.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum QbStatus qb_scenario_new(size_t n_charger,
                              size_t n_batteries,
                              size_t battery_size,
                              double gamma_down,
                              double gamma_up,
                              struct QbScenario **out);

/*
 Scenario with individual battery sizes.

 # Safety
 `battery_sizes` must point to `n_batteries` readable values; `out` as in
 [`qb_scenario_new`].
 */
enum QbStatus qb_scenario_new_sizes(size_t n_charger,
                                    const size_t *battery_sizes,
                                    size_t n_batteries,
                                    double gamma_down,
                                    double gamma_up,
                                    struct QbScenario **out);

/*
 Parses a TOML scenario file body. `method_out` may be null.

 # Safety
 `toml` must be a NUL-terminated string; `out` as in [`qb_scenario_new`];
 `method_out` null or writable.
 */
enum QbStatus qb_scenario_from_toml(const char *toml,
                                    struct QbScenario **out,
                                    enum QbMethod *method_out);

/*
 # Safety
 `scenario` must be null or a live handle.
 */
enum QbStatus qb_scenario_set_nbar(struct QbScenario *scenario, double nbar);

/*
 # Safety
 `scenario` must be null or a live handle.
 */
enum QbStatus qb_scenario_set_horizon(struct QbScenario *scenario,
                                      double tau_max,
                                      double output_stride);

/*
 # Safety
 `scenario` must be null or a live handle.
 */
enum QbStatus qb_scenario_set_tolerances(struct QbScenario *scenario, double rtol, double atol);

/*
 Sets ensemble `ensemble` (0 = charger) fully excited or ground.

 # Safety
 `scenario` must be null or a live handle.
 */
enum QbStatus qb_scenario_set_initial_level(struct QbScenario *scenario,
                                            size_t ensemble,
                                            bool excited);

/*
 # Safety
 `scenario` must be null or a handle not yet freed.
 */
void qb_scenario_free(struct QbScenario *scenario);

/*
 Integrates once on the scenario's own horizon.

 # Safety
 `scenario` must be a live handle; `out` writable.
 */
enum QbStatus qb_integrate(const struct QbScenario *scenario,
                           enum QbMethod method,
                           struct QbTrajectory **out);

/*
 Integrates, doubling the horizon until every ensemble is steady.

 # Safety
 As for [`qb_integrate`].
 */
enum QbStatus qb_run_to_steady(const struct QbScenario *scenario,
                               enum QbMethod method,
                               struct QbTrajectory **out);

/*
 Number of grid points, 0 for a null handle.

 # Safety
 `traj` must be null or a live handle.
 */
size_t qb_trajectory_len(const struct QbTrajectory *traj);

/*
 Number of ensembles (charger included), 0 for a null handle.

 # Safety
 `traj` must be null or a live handle.
 */
size_t qb_trajectory_n_ensembles(const struct QbTrajectory *traj);

/*
 Copies the scaled-time grid into `buf` (capacity `len`).

 # Safety
 `traj` live; `buf` writable for `len` values.
 */
enum QbStatus qb_trajectory_tau(const struct QbTrajectory *traj, double *buf, size_t len);

/*
 Copies the energy density of `ensemble` into `buf` (capacity `len`).

 # Safety
 As for [`qb_trajectory_tau`].
 */
enum QbStatus qb_trajectory_energies(const struct QbTrajectory *traj,
                                     size_t ensemble,
                                     double *buf,
                                     size_t len);

/*
 Mean energy over the final `window` fraction if it varies by less than `tol`.

 # Safety
 `traj` live; `out` writable.
 */
enum QbStatus qb_trajectory_steady_state(const struct QbTrajectory *traj,
                                         size_t ensemble,
                                         double window,
                                         double tol,
                                         double *out);

/*
 Scaled time at which `ensemble` reaches `threshold` of its steady value.

 # Safety
 `traj` live; `out` writable.
 */
enum QbStatus qb_trajectory_charging_time(const struct QbTrajectory *traj,
                                          size_t ensemble,
                                          double threshold,
                                          double *out);

/*
 # Safety
 `traj` must be null or a handle not yet freed.
 */
void qb_trajectory_free(struct QbTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QBCHARGE_H */
