#ifndef QCOLLIDE_H
#define QCOLLIDE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcStatus {
  QC_STATUS_OK = 0,
  QC_STATUS_NULL_POINTER = 1,
  QC_STATUS_INVALID_ARGUMENT = 2,
  QC_STATUS_DIMENSION_MISMATCH = 3,
  QC_STATUS_INVALID_STATE = 4,
  QC_STATUS_BUFFER_TOO_SMALL = 5,
  QC_STATUS_PANIC = 6,
} QcStatus;

typedef enum QcRhsForm {
  QC_RHS_FORM_MAP = 0,
  QC_RHS_FORM_KRAUS = 1,
} QcRhsForm;

/**
 * Opaque time series of density matrices.
 */
typedef struct QcSeries QcSeries;

/**
 * Opaque collision model.
 */
typedef struct QcSpec QcSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread. Valid until the
 * next failing call on the same thread.
 */
const char *qc_last_error_message(void);

/**
 * Builds a collision model from an explicit unitary on `d_s * d_a`
 * dimensions and an ancilla state on `d_a`.
 *
 * # Safety
 * `unitary` must point to `2 * (d_s*d_a)^2` doubles, `eta` to `2 * d_a^2`
 * doubles, and `out` to writable storage for one handle.
 */
enum QcStatus qc_spec_new(size_t d_s,
                          size_t d_a,
                          const double *unitary,
                          const double *eta,
                          double gamma,
                          struct QcSpec **out);

/**
 * Partial-swap collision `cos(theta) I + i sin(theta) SWAP` between two
 * `d`-level systems, ancilla in basis state `eta_index`.
 *
 * # Safety
 * `out` must point to writable storage for one handle.
 */
enum QcStatus qc_spec_new_partial_swap(size_t d,
                                       double theta,
                                       size_t eta_index,
                                       double gamma,
                                       struct QcSpec **out);

/**
 * # Safety
 * `spec` must be null or a handle from `qc_spec_new*` not yet freed.
 */
void qc_spec_free(struct QcSpec *spec);

/**
 * System dimension of a collision model, 0 for a null handle.
 *
 * # Safety
 * `spec` must be null or a live handle.
 */
size_t qc_spec_system_dim(const struct QcSpec *spec);

/**
 * Integrates the master equation with fixed-step RK4.
 *
 * # Safety
 * `rho0` must hold `2 * d_s^2` doubles, `times` `n_times` doubles, and
 * `out` must be writable.
 */
enum QcStatus qc_integrate_me(const struct QcSpec *spec,
                              const double *rho0,
                              const double *times,
                              size_t n_times,
                              double step,
                              enum QcRhsForm rhs_form,
                              struct QcSeries **out);

/**
 * Monte Carlo average over `n_traj` stochastic trajectories. A negative
 * `fixed_n` samples Poisson collision times; otherwise exactly `fixed_n`
 * collisions occur before the last output time.
 *
 * # Safety
 * As for [`qc_integrate_me`].
 */
enum QcStatus qc_ensemble_average(const struct QcSpec *spec,
                                  const double *rho0,
                                  const double *times,
                                  size_t n_times,
                                  size_t n_traj,
                                  uint64_t seed,
                                  int64_t fixed_n,
                                  struct QcSeries **out);

/**
 * Periodic model with extended ancillas: `n_steps` steps of `delta_t`.
 *
 * # Safety
 * `rho0` must hold `2 * d_s^2` doubles and `out` must be writable.
 */
enum QcStatus qc_run_periodic(const struct QcSpec *spec,
                              const double *rho0,
                              double delta_t,
                              size_t n_steps,
                              struct QcSeries **out);

/**
 * Periodic model whose bath is the uniform mixture of all placements of
 * exactly `m` colliding ancillas among `n_slots`.
 *
 * # Safety
 * `rho0` must hold `2 * d_s^2` doubles and `out` must be writable.
 */
enum QcStatus qc_run_fixed_m_bath(const struct QcSpec *spec,
                                  const double *rho0,
                                  size_t n_slots,
                                  size_t m,
                                  double delta_t,
                                  struct QcSeries **out);

/**
 * Number of time points, 0 for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
size_t qc_series_len(const struct QcSeries *series);

/**
 * Dimension of the states, 0 for a null handle or empty series.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
size_t qc_series_dim(const struct QcSeries *series);

/**
 * Copies the time grid into `out` (capacity `cap` doubles).
 *
 * # Safety
 * `out` must be writable for `cap` doubles.
 */
enum QcStatus qc_series_times(const struct QcSeries *series, double *out, size_t cap);

/**
 * Copies state `index` as `2 * d^2` interleaved doubles into `out`.
 *
 * # Safety
 * `out` must be writable for `cap` doubles.
 */
enum QcStatus qc_series_state(const struct QcSeries *series, size_t index, double *out, size_t cap);

/**
 * # Safety
 * `series` must be null or a handle not yet freed.
 */
void qc_series_free(struct QcSeries *series);

/**
 * Trace distance between two `d x d` density matrices.
 *
 * # Safety
 * `a` and `b` must hold `2 * d^2` doubles; `out` must be writable.
 */
enum QcStatus qc_trace_distance(const double *a, const double *b, size_t d, double *out);

/**
 * Sum of positive increments of a trace-distance series.
 *
 * # Safety
 * `times` and `distances` must hold `n` doubles; `out` must be writable.
 */
enum QcStatus qc_blp_witness(const double *times, const double *distances, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCOLLIDE_H */
