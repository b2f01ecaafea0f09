#ifndef SYLVENC_H
#define SYLVENC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Generated problem families.
 */
typedef enum {
  SYLVENC_FAMILY_KYC31 = 0,
  SYLVENC_FAMILY_SYLVESTER32 = 1,
  SYLVENC_FAMILY_GALLERY33 = 2,
} SylvencFamily;

/**
 * Enclosure methods.
 */
typedef enum {
  SYLVENC_METHOD_MKW = 0,
  SYLVENC_METHOD_ITR = 1,
  SYLVENC_METHOD_VER = 2,
  SYLVENC_METHOD_BLK = 3,
} SylvencMethod;

/**
 * Status codes returned by every fallible function.
 */
typedef enum {
  SYLVENC_STATUS_OK = 0,
  SYLVENC_STATUS_NULL_POINTER = 1,
  SYLVENC_STATUS_INVALID_INPUT = 2,
  SYLVENC_STATUS_DIMENSION_MISMATCH = 3,
  SYLVENC_STATUS_SINGULAR = 4,
  SYLVENC_STATUS_EIGEN_FAILED = 5,
  SYLVENC_STATUS_NO_INITIAL_ENCLOSURE = 6,
  SYLVENC_STATUS_SIZE_CAP = 7,
  SYLVENC_STATUS_OVERFLOW = 8,
  SYLVENC_STATUS_INCONSISTENT = 9,
  SYLVENC_STATUS_IO = 10,
  SYLVENC_STATUS_PANIC = 11,
} SylvencStatus;

/**
 * Opaque enclosure result.
 */
typedef struct SylvencEnclosure SylvencEnclosure;

/**
 * Opaque interval system `A X B + C X D = F`.
 */
typedef struct SylvencSystem SylvencSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * call into this library from the same thread.
 */
const char *sylvenc_last_error(void);

/**
 * Builds a real system from row-major midpoints and radii. Any radius
 * pointer may be NULL for a point matrix. `A`, `C` are `m x m`, `B`, `D` are
 * `n x n` and `F` is `m x n`.
 */
SylvencStatus sylvenc_system_new_real(size_t m,
                                      size_t n,
                                      const double *a_mid,
                                      const double *a_rad,
                                      const double *b_mid,
                                      const double *b_rad,
                                      const double *c_mid,
                                      const double *c_rad,
                                      const double *d_mid,
                                      const double *d_rad,
                                      const double *f_mid,
                                      const double *f_rad,
                                      SylvencSystem **out);

/**
 * Parses a system from its JSON form.
 */
SylvencStatus sylvenc_system_from_json(const char *json, SylvencSystem **out);

/**
 * Generates a seeded test system. `n` is ignored for `Gallery33`.
 */
SylvencStatus sylvenc_system_generate(SylvencFamily family,
                                      size_t m,
                                      size_t n,
                                      double alpha,
                                      uint64_t seed,
                                      SylvencSystem **out);

/**
 * Writes the unknown's shape.
 */
SylvencStatus sylvenc_system_shape(const SylvencSystem *sys, size_t *m, size_t *n);

void sylvenc_system_free(SylvencSystem *sys);

/**
 * Encloses the solution set with default options. An unverified result is
 * still returned with `SYLVENC_STATUS_OK`; query it with
 * [`sylvenc_enclosure_verified`].
 */
SylvencStatus sylvenc_solve(const SylvencSystem *sys, SylvencMethod method, SylvencEnclosure **out);

SylvencStatus sylvenc_enclosure_verified(const SylvencEnclosure *enc, bool *out);

/**
 * Copies the evaluated enclosure into row-major arrays of length `m n`.
 * `mid_im` may be NULL.
 */
SylvencStatus sylvenc_enclosure_bounds(const SylvencEnclosure *enc,
                                       double *mid_re,
                                       double *mid_im,
                                       double *rad);

/**
 * Serializes the enclosure; free the string with [`sylvenc_string_free`].
 */
SylvencStatus sylvenc_enclosure_to_json(const SylvencEnclosure *enc, char **out);

/**
 * Samples `samples` member solutions and counts those inside the enclosure.
 */
SylvencStatus sylvenc_check(const SylvencSystem *sys,
                            const SylvencEnclosure *enc,
                            size_t samples,
                            uint64_t seed,
                            size_t *contained,
                            size_t *total);

void sylvenc_enclosure_free(SylvencEnclosure *enc);

void sylvenc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYLVENC_H */
