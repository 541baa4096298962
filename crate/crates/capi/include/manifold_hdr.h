/* C interface for the manifold-hdr estimator. */

#ifndef MANIFOLD_HDR_H
#define MANIFOLD_HDR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status of a C-interface call.
typedef enum MhdrStatus {
  MHDR_STATUS_OK = 0,
  // Invalid configuration (bad manifold tag, nonpositive radius, ...).
  MHDR_STATUS_CONFIG_ERROR = 1,
  // Invalid data (manifold mismatch, non-finite coordinate, ...).
  MHDR_STATUS_DOMAIN_ERROR = 2,
  // A data file could not be read or interpreted.
  MHDR_STATUS_INGESTION_ERROR = 3,
  // Filesystem or serialization failure.
  MHDR_STATUS_IO_ERROR = 4,
  // A required pointer argument was null.
  MHDR_STATUS_NULL_POINTER = 5,
  // A string argument was not valid UTF-8.
  MHDR_STATUS_INVALID_UTF8 = 6,
  // The implementation panicked; state may be stale but memory is safe.
  MHDR_STATUS_PANIC = 7,
} MhdrStatus;

// A density model: a kernel density estimate over a sample.
typedef struct MhdrDensity MhdrDensity;

// A fitted highest-density-region estimate.
typedef struct MhdrEstimate MhdrEstimate;

// A point sample on a manifold.
typedef struct MhdrSample MhdrSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *mhdr_version(void);

// Message of the last failure on this thread, empty when none. The
// pointer stays valid until the next failing call on the same thread.
const char *mhdr_last_error_message(void);

// Creates an empty sample on the named manifold
// (`"circle"`, `"sphere2"`, `"torus2"`, `"torus3"`, ..., `"euclidean2"`, ...).
//
// # Safety
// `manifold_tag` must be NUL-terminated; `out` must be a valid pointer.
enum MhdrStatus mhdr_sample_new(const char *manifold_tag, struct MhdrSample **out);

// Appends one point given as `len` coordinates.
//
// # Safety
// `coords` must point to `len` readable doubles.
enum MhdrStatus mhdr_sample_push(struct MhdrSample *sample, const double *coords, size_t len);

// Reads a sample CSV (header `manifold,dim,c1..`).
//
// # Safety
// `path` must be NUL-terminated; `out` must be a valid pointer.
enum MhdrStatus mhdr_sample_read_csv(const char *path, struct MhdrSample **out);

// Number of points; 0 for a null handle.
//
// # Safety
// `sample` must be null or a live handle from this library.
size_t mhdr_sample_len(const struct MhdrSample *sample);

// Coordinates per point; 0 for a null handle.
//
// # Safety
// `sample` must be null or a live handle from this library.
size_t mhdr_sample_ambient_dim(const struct MhdrSample *sample);

// Copies the flat coordinate buffer (`len * ambient_dim` doubles) into
// `buf`, which must hold at least `buf_len` doubles.
//
// # Safety
// `buf` must point to `buf_len` writable doubles.
enum MhdrStatus mhdr_sample_coords(const struct MhdrSample *sample, double *buf, size_t buf_len);

// Frees a sample handle; null is a no-op.
//
// # Safety
// `sample` must be a pointer from this library, freed at most once.
void mhdr_sample_free(struct MhdrSample *sample);

// Fits a kernel density estimate over the sample. A nonpositive
// `concentration` selects it by leave-one-out cross-validation.
//
// # Safety
// `out` must be a valid pointer.
enum MhdrStatus mhdr_kde_new(const struct MhdrSample *sample,
                             double concentration,
                             struct MhdrDensity **out);

// Evaluates the density at one point given as `len` coordinates.
//
// # Safety
// `coords` must point to `len` readable doubles; `out` must be valid.
enum MhdrStatus mhdr_density_pdf(const struct MhdrDensity *density,
                                 const double *coords,
                                 size_t len,
                                 double *out);

// Frees a density handle; null is a no-op.
//
// # Safety
// `density` must be a pointer from this library, freed at most once.
void mhdr_density_free(struct MhdrDensity *density);

// Estimates the region holding probability mass `1 - gamma` using balls
// of radius `r_n`.
//
// # Safety
// `out` must be a valid pointer.
enum MhdrStatus mhdr_estimate_by_probability(const struct MhdrSample *sample,
                                             const struct MhdrDensity *density,
                                             double gamma,
                                             double r_n,
                                             struct MhdrEstimate **out);

// Estimates the region where the density exceeds `lambda` using balls of
// radius `r_n`.
//
// # Safety
// `out` must be a valid pointer.
enum MhdrStatus mhdr_estimate_at_level(const struct MhdrSample *sample,
                                       const struct MhdrDensity *density,
                                       double lambda,
                                       double r_n,
                                       struct MhdrEstimate **out);

// Tests whether the point given as `len` coordinates lies in the region:
// writes 1 or 0 to `out`.
//
// # Safety
// `coords` must point to `len` readable doubles; `out` must be valid.
enum MhdrStatus mhdr_estimate_contains(const struct MhdrEstimate *estimate,
                                       const double *coords,
                                       size_t len,
                                       int32_t *out);

// Threshold the estimate was built at; NaN for a null handle.
//
// # Safety
// `estimate` must be null or a live handle from this library.
double mhdr_estimate_lambda(const struct MhdrEstimate *estimate);

// Ball radius of the estimate; NaN for a null handle.
//
// # Safety
// `estimate` must be null or a live handle from this library.
double mhdr_estimate_radius(const struct MhdrEstimate *estimate);

// Number of selected ball centers; 0 for a null handle.
//
// # Safety
// `estimate` must be null or a live handle from this library.
size_t mhdr_estimate_center_count(const struct MhdrEstimate *estimate);

// Number of connected components; 0 for a null handle or empty estimate.
//
// # Safety
// `estimate` must be null or a live handle from this library.
size_t mhdr_estimate_component_count(const struct MhdrEstimate *estimate);

// Writes the estimate as JSON.
//
// # Safety
// `path` must be NUL-terminated.
enum MhdrStatus mhdr_estimate_write_json(const struct MhdrEstimate *estimate, const char *path);

// Frees an estimate handle; null is a no-op.
//
// # Safety
// `estimate` must be a pointer from this library, freed at most once.
void mhdr_estimate_free(struct MhdrEstimate *estimate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MANIFOLD_HDR_H */
