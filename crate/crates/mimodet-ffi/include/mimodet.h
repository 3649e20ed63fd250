#ifndef MIMODET_H
#define MIMODET_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum MimodetStatus {
  MIMODET_STATUS_OK = 0,
  MIMODET_STATUS_NULL_POINTER = 1,
  MIMODET_STATUS_INVALID_ARGUMENT = 2,
  MIMODET_STATUS_RANK_DEFICIENT = 3,
  MIMODET_STATUS_SEARCH_EXHAUSTED = 4,
  MIMODET_STATUS_INSTANCE_TOO_LARGE = 5,
} MimodetStatus;

/**
 * Detector selection for [`mimodet_detector_new`].
 */
typedef enum MimodetAlgorithm {
  MIMODET_ALGORITHM_BRUTE_FORCE_ML = 0,
  MIMODET_ALGORITHM_QRD_MLD = 1,
  MIMODET_ALGORITHM_QRD_MLD_IMPROVED = 2,
  MIMODET_ALGORITHM_DIJKSTRA_BOUNDED = 3,
  MIMODET_ALGORITHM_DIJKSTRA_UNBOUNDED = 4,
} MimodetAlgorithm;

/**
 * Opaque detector handle.
 */
typedef struct mimodet_detector mimodet_detector;

/**
 * Detector parameters. `snr_db` is used to derive the noise variance
 * consumed by the improved QRD-MLD threshold.
 */
typedef struct MimodetConfig {
  /**
   * Transmit antennas (columns of H).
   */
  uintptr_t t;
  /**
   * Receive antennas (rows of H), must be >= t.
   */
  uintptr_t r;
  /**
   * Square QAM order: 4, 16 or 64.
   */
  uintptr_t qam_order;
  enum MimodetAlgorithm algorithm;
  /**
   * QRD-MLD breadth.
   */
  uintptr_t m;
  /**
   * Improved-QRD-MLD threshold factor.
   */
  double x;
  /**
   * Dijkstra list bound.
   */
  uintptr_t l;
  /**
   * Number of outputs (N-best).
   */
  uintptr_t n;
  /**
   * Operating SNR in dB.
   */
  double snr_db;
} MimodetConfig;

/**
 * Exact operation counts for one detection.
 */
typedef struct MimodetCounters {
  uint64_t complex_mul_div;
  uint64_t real_comparisons;
  uint64_t detection_nodes;
} MimodetCounters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a detector from `cfg` and writes the handle to `out`.
 * Free it with [`mimodet_detector_free`].
 *
 * # Safety
 * `cfg` and `out` must be valid pointers.
 */
enum MimodetStatus mimodet_detector_new(const struct MimodetConfig *cfg,
                                        struct mimodet_detector **out);

/**
 * Releases a handle returned by [`mimodet_detector_new`]. A null pointer is
 * a no-op.
 *
 * # Safety
 * `det` must be a pointer from [`mimodet_detector_new`], not yet freed.
 */
void mimodet_detector_free(struct mimodet_detector *det);

/**
 * Runs one detection.
 *
 * Inputs: `h` is the row-major r x t channel matrix (`2*r*t` doubles,
 * interleaved), `y` the received vector (`2*r` doubles). Outputs: `x_out`
 * receives the `n` best symbol vectors back to back (`2*t*n` doubles, best
 * first); `metrics_out` (nullable) receives `n` accumulated metrics;
 * `counters_out` (nullable) receives the operation counts. QR runs per call
 * and is excluded from the counts.
 *
 * # Safety
 * Pointers must be valid for the lengths stated above.
 */
enum MimodetStatus mimodet_detect(const struct mimodet_detector *det,
                                  const double *h,
                                  const double *y,
                                  double *x_out,
                                  double *metrics_out,
                                  struct MimodetCounters *counters_out);

/**
 * Noise variance `phi^2 = t * E_s * 10^(-SNR/10)` for a supported QAM
 * order; returns a negative value for an unsupported order.
 */
double mimodet_noise_variance(double snr_db, uintptr_t t, uintptr_t qam_order);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIMODET_H */
