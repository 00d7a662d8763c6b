#ifndef QFM_H
#define QFM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every API call.
 */
typedef enum {
  QFM_STATUS_OK = 0,
  /**
   * A pointer argument was null or a buffer length did not match.
   */
  QFM_STATUS_NULL_POINTER = 1,
  /**
   * Invalid name, shape, or parameter value.
   */
  QFM_STATUS_INVALID_CONFIG = 2,
  /**
   * Simulation or optimization failure.
   */
  QFM_STATUS_NUMERICAL = 3,
  /**
   * An internal invariant was violated (caught panic).
   */
  QFM_STATUS_INTERNAL = 5,
} QfmStatus;

/**
 * Opaque model handle; create with `qfm_model_new`, release with
 * `qfm_model_free`.
 */
typedef struct QfmModel QfmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. Valid until the next
 * API call from the same thread; never null.
 */
const char *qfm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qfm_version(void);

/**
 * Builds a model with the named ansatz and encoding scheme, `n_layers`
 * data-reuploading layers, and a Z(0) readout. On success `*out` owns the
 * handle.
 *
 * # Safety
 * `ansatz` and `encoding` must be NUL-terminated strings; `out` must be a
 * valid pointer.
 */
QfmStatus qfm_model_new(uintptr_t n_qubits,
                        uintptr_t n_layers,
                        const char *ansatz,
                        const char *encoding,
                        QfmModel **out);

/**
 * Releases a handle from `qfm_model_new`. Null is a no-op.
 *
 * # Safety
 * `model` must be a pointer previously returned by `qfm_model_new` and not
 * yet freed.
 */
void qfm_model_free(QfmModel *model);

/**
 * Trainable parameter shape: `*rows = n_layers + 1`, `*cols` = parameters
 * per layer.
 *
 * # Safety
 * All pointers must be valid.
 */
QfmStatus qfm_model_param_shape(const QfmModel *model, uintptr_t *rows, uintptr_t *cols);

/**
 * Z(0) expectation of the model at input `x` (row-major `params`, shape
 * from `qfm_model_param_shape`). `shots = 0` means analytic readout;
 * `noise_p > 0` switches to the density-matrix path.
 *
 * # Safety
 * Buffers must match their stated lengths; `out` must be valid.
 */
QfmStatus qfm_model_forward(const QfmModel *model,
                            const double *x,
                            uintptr_t x_len,
                            const double *params,
                            uintptr_t params_len,
                            double noise_p,
                            uint64_t shots,
                            uint64_t seed,
                            double *out);

/**
 * KL-divergence expressibility of the model against the Haar baseline.
 *
 * # Safety
 * `out` must be valid.
 */
QfmStatus qfm_model_expressibility(const QfmModel *model,
                                   uintptr_t n_pairs,
                                   uintptr_t n_bins,
                                   uint64_t seed,
                                   double *out);

/**
 * Entangling capability under the named measure (`mw`, `bm`, `ef`, `ce`):
 * mean and sample standard deviation over `n_samples` parameter draws.
 * `shots = 0` means analytic probabilities.
 *
 * # Safety
 * `measure` must be NUL-terminated; out-pointers must be valid.
 */
QfmStatus qfm_model_entanglement(const QfmModel *model,
                                 const char *measure,
                                 uintptr_t n_samples,
                                 double noise_p,
                                 uint64_t shots,
                                 uint64_t seed,
                                 double *out_mean,
                                 double *out_std);

/**
 * State infidelity between the gate-level circuit and its pulse compilation
 * under the analytic calibration for a transmon-like spec with qubit
 * frequency `omega_q` and ZZ coupling `j` (rotating frame).
 *
 * # Safety
 * Buffers must match their stated lengths; `out` must be valid.
 */
QfmStatus qfm_model_pulse_infidelity(const QfmModel *model,
                                     const double *x,
                                     uintptr_t x_len,
                                     const double *params,
                                     uintptr_t params_len,
                                     double omega_q,
                                     double j,
                                     double *out);

/**
 * Text diagram of the circuit at input `x`. The returned string is owned by
 * the caller; release it with `qfm_string_free`.
 *
 * # Safety
 * Buffers must match their stated lengths; `out` must be valid.
 */
QfmStatus qfm_model_draw(const QfmModel *model,
                         const double *x,
                         uintptr_t x_len,
                         const double *params,
                         uintptr_t params_len,
                         char **out);

/**
 * Frees a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must come from `qfm_model_draw` and not be freed twice.
 */
void qfm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFM_H */
