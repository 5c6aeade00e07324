#ifndef SIMPLEX_INFOGEO_H
#define SIMPLEX_INFOGEO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SxiStatus {
  SXI_STATUS_OK = 0,
  SXI_STATUS_NULL_POINTER = 1,
  SXI_STATUS_INVALID_ARGUMENT = 2,
  SXI_STATUS_DIMENSION_MISMATCH = 3,
  SXI_STATUS_BUFFER_TOO_SMALL = 4,
  SXI_STATUS_PANIC = 5,
} SxiStatus;

typedef enum SxiContrastKind {
  SXI_CONTRAST_KIND_HELMERT = 0,
  SXI_CONTRAST_KIND_PIVOT = 1,
} SxiContrastKind;

/**
 * Opaque composition handle.
 */
typedef struct SxiComposition SxiComposition;

/**
 * Opaque contrast-matrix handle.
 */
typedef struct SxiContrast SxiContrast;

/**
 * Pre- and post-amalgamation values and margins of one audit.
 */
typedef struct SxiMonotonicityAudit {
  double aitchison_before;
  double aitchison_after;
  double aitchison_margin;
  double kl_before;
  double kl_after;
  double kl_margin;
  double geomean_margin;
  bool passed;
} SxiMonotonicityAudit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sxi_version(void);

/**
 * Message for the last failed call on this thread; valid until the next
 * failing call on the same thread. Empty if nothing failed yet.
 */
const char *sxi_last_error_message(void);

/**
 * Creates a composition from `len` strictly positive parts.
 *
 * # Safety
 * `parts` must point to `len` readable doubles and `out` must be writable.
 */
enum SxiStatus sxi_composition_new(const double *parts, size_t len, struct SxiComposition **out);

/**
 * # Safety
 * `c` must come from [`sxi_composition_new`] and not be freed twice. Null is ignored.
 */
void sxi_composition_free(struct SxiComposition *c);

/**
 * Number of parts, or 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
size_t sxi_composition_dim(const struct SxiComposition *c);

/**
 * Writes the closed parts.
 *
 * # Safety
 * `c` must be a live handle and `out` must hold `len` doubles.
 */
enum SxiStatus sxi_composition_parts(const struct SxiComposition *c, double *out, size_t len);

/**
 * Writes the `D` clr coordinates.
 *
 * # Safety
 * `c` must be a live handle and `out` must hold `len` doubles.
 */
enum SxiStatus sxi_clr(const struct SxiComposition *c, double *out, size_t len);

/**
 * Writes the `D−1` alr coordinates, last part as reference.
 *
 * # Safety
 * `c` must be a live handle and `out` must hold `len` doubles.
 */
enum SxiStatus sxi_alr(const struct SxiComposition *c, double *out, size_t len);

/**
 * # Safety
 * `out` must be writable.
 */
enum SxiStatus sxi_contrast_new(enum SxiContrastKind kind, size_t dim, struct SxiContrast **out);

/**
 * # Safety
 * `v` must come from [`sxi_contrast_new`] and not be freed twice. Null is ignored.
 */
void sxi_contrast_free(struct SxiContrast *v);

/**
 * Writes the `D−1` ilr coordinates under contrast `v`.
 *
 * # Safety
 * Handles must be live and `out` must hold `len` doubles.
 */
enum SxiStatus sxi_ilr(const struct SxiComposition *c,
                       const struct SxiContrast *v,
                       double *out,
                       size_t len);

/**
 * Aitchison distance `d_A(x, y)`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SxiStatus sxi_aitchison_distance(const struct SxiComposition *x,
                                      const struct SxiComposition *y,
                                      double *out);

/**
 * Relative entropy `Σ xᵢ log(xᵢ/yᵢ)`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SxiStatus sxi_kl(const struct SxiComposition *x, const struct SxiComposition *y, double *out);

/**
 * Reverse relative entropy `Σ yᵢ log(yᵢ/xᵢ)`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SxiStatus sxi_kl_reverse(const struct SxiComposition *x,
                              const struct SxiComposition *y,
                              double *out);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SxiStatus sxi_alpha_divergence(double alpha,
                                    const struct SxiComposition *x,
                                    const struct SxiComposition *y,
                                    double *out);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SxiStatus sxi_hellinger(const struct SxiComposition *x,
                             const struct SxiComposition *y,
                             double *out);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SxiStatus sxi_bhattacharyya(const struct SxiComposition *x,
                                 const struct SxiComposition *y,
                                 double *out);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SxiStatus sxi_fisher_distance(const struct SxiComposition *x,
                                   const struct SxiComposition *y,
                                   double *out);

/**
 * Box-Cox distance; `weights` holds `D` nonnegative values.
 *
 * # Safety
 * Handles must be live, `weights` must hold `weights_len` doubles and `out` be writable.
 */
enum SxiStatus sxi_boxcox_distance(double beta,
                                   const double *weights,
                                   size_t weights_len,
                                   const struct SxiComposition *x,
                                   const struct SxiComposition *y,
                                   double *out);

/**
 * Legendre-Fenchel gap `ψ(θ_x) + φ(η_y) − θ_x·η_y`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SxiStatus sxi_fenchel_gap(const struct SxiComposition *x,
                               const struct SxiComposition *y,
                               double *out);

/**
 * # Safety
 * `x` must be live and `out` writable.
 */
enum SxiStatus sxi_shannon_entropy(const struct SxiComposition *x, double *out);

/**
 * Audits information monotonicity when the 0-based parts in `subset` are
 * amalgamated.
 *
 * # Safety
 * Handles must be live, `subset` must hold `subset_len` indices and `out` be writable.
 */
enum SxiStatus sxi_monotonicity_audit(const struct SxiComposition *x,
                                      const struct SxiComposition *y,
                                      const size_t *subset,
                                      size_t subset_len,
                                      struct SxiMonotonicityAudit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMPLEX_INFOGEO_H */
