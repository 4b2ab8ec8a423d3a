#ifndef ISOSPEC_H
#define ISOSPEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IsospecClass {
  ISOSPEC_CLASS_UH = 0,
  ISOSPEC_CLASS_NOT_UH = 1,
  ISOSPEC_CLASS_UNDECIDED = 2,
} IsospecClass;

typedef enum IsospecStatus {
  ISOSPEC_STATUS_OK = 0,
  ISOSPEC_STATUS_NULL_POINTER = 1,
  ISOSPEC_STATUS_INVALID_UTF8 = 2,
  ISOSPEC_STATUS_INVALID_INPUT = 3,
  ISOSPEC_STATUS_DOMAIN = 4,
  ISOSPEC_STATUS_NUMERICAL = 5,
  ISOSPEC_STATUS_SMALL_DENOMINATOR = 6,
  ISOSPEC_STATUS_CONFIG = 7,
  ISOSPEC_STATUS_IO = 8,
  ISOSPEC_STATUS_PANIC = 9,
} IsospecStatus;

/**
 * Opaque experiment handle.
 */
typedef struct IsospecExperiment IsospecExperiment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *isospec_last_error(void);

/**
 * Static version string.
 */
const char *isospec_version(void);

/**
 * Parse and validate a TOML configuration. `toml` may be an empty string
 * for the built-in defaults.
 *
 * # Safety
 * `toml` must be a valid NUL-terminated string and `out` writable.
 */
enum IsospecStatus isospec_experiment_from_toml(const char *toml, struct IsospecExperiment **out);

/**
 * # Safety
 * `handle` must come from [`isospec_experiment_from_toml`] and not be used
 * afterwards. Null is ignored.
 */
void isospec_experiment_free(struct IsospecExperiment *handle);

/**
 * Hex SHA-256 digest of the canonical configuration. Release with
 * [`isospec_string_free`].
 *
 * # Safety
 * `handle` must be live and `out` writable.
 */
enum IsospecStatus isospec_experiment_digest(const struct IsospecExperiment *handle, char **out);

/**
 * Lyapunov exponent at energy `re + i im` with phase shift `eps`.
 *
 * # Safety
 * `handle` must be live; `value` and `std_error` writable.
 */
enum IsospecStatus isospec_lyapunov(const struct IsospecExperiment *handle,
                                    double re,
                                    double im,
                                    double eps,
                                    double *value,
                                    double *std_error);

/**
 * Uniform hyperbolicity verdict and exponent at one energy.
 *
 * # Safety
 * `handle` must be live; `verdict` and `lyapunov_out` writable.
 */
enum IsospecStatus isospec_uh_classify(const struct IsospecExperiment *handle,
                                       double re,
                                       double im,
                                       double eps,
                                       enum IsospecClass *verdict,
                                       double *lyapunov_out);

/**
 * Exponent of the free operator, `log|E/2 + sqrt(E^2/4 - 1)|` on the
 * larger branch.
 */
double isospec_free_laplacian_le(double re, double im);

/**
 * Reducibility trace at one energy as JSON lines, the last line being a
 * summary. Release with [`isospec_string_free`].
 *
 * # Safety
 * `handle` must be live and `out` writable.
 */
enum IsospecStatus isospec_kam_trace(const struct IsospecExperiment *handle,
                                     double re,
                                     double im,
                                     char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void isospec_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOSPEC_H */
