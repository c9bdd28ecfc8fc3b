/* C interface to the PHI payment-distribution scoring engine. */

#ifndef PHI_H
#define PHI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum PhiStatus {
  PHI_STATUS_OK = 0,
  PHI_STATUS_NULL_POINTER = 1,
  PHI_STATUS_INVALID_ARGUMENT = 2,
  PHI_STATUS_INSUFFICIENT_DATA = 3,
  PHI_STATUS_NUMERICAL_ERROR = 4,
  PHI_STATUS_CONFIG_ERROR = 5,
  PHI_STATUS_INGEST_ERROR = 6,
  PHI_STATUS_IO_ERROR = 7,
} PhiStatus;

// Opaque scorer handle.
typedef struct PhiScorer PhiScorer;

// One supplier's score decomposition.
typedef struct PhiBreakdown {
  // Retained mixture component count M.
  uint32_t modality;
  // Asymmetry component A in [1, 2].
  double asymmetry;
  // Tail component T >= 1.
  double tail;
  // Structural dispersion D >= 1.
  double dispersion;
  // The product M * A * T * D.
  double phi;
  // Log-contribution shares in percent; all zero when degenerate.
  double contrib_modality_pct;
  double contrib_asymmetry_pct;
  double contrib_tail_pct;
  double contrib_dispersion_pct;
  // 1 when phi <= 1 + 1e-12 and the decomposition is undefined.
  uint8_t degenerate;
} PhiBreakdown;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a scorer with explicit EM and scoring settings. Returns null
// when a setting is out of range (tol/reg/eps must be positive,
// max_iter/n_init at least 1, prune_weight in [0, 0.25)).
struct PhiScorer *phi_scorer_new(double tol,
                                 size_t max_iter,
                                 size_t n_init,
                                 uint64_t seed,
                                 double reg,
                                 double prune_weight,
                                 double eps);

// Create a scorer with the operational defaults (tol 1e-3, max_iter 100,
// n_init 1, seed 0, reg 1e-6, prune 0.05, eps 1e-6).
struct PhiScorer *phi_scorer_default(void);

// Free a scorer created by `phi_scorer_new`/`phi_scorer_default`.
// Passing null is a no-op.
//
// # Safety
// `scorer` must be a pointer previously returned by one of the scorer
// constructors and not yet freed.
void phi_scorer_free(struct PhiScorer *scorer);

// Compute the corpus-wide robust scale (median and interquartile range)
// over the cleaned payment amounts in GBP.
//
// # Safety
// `values` must point to `len` readable doubles; `out_median` and
// `out_iqr` must be writable.
enum PhiStatus phi_global_scale(const double *values,
                                size_t len,
                                double *out_median,
                                double *out_iqr);

// Score one supplier's raw GBP payment amounts against a corpus scale:
// robust-standardise, fit mixtures with BIC selection and pruning, and
// fill `out` with the component decomposition.
//
// # Safety
// `scorer` must be a live scorer handle; `amounts_gbp` must point to
// `len` readable doubles; `out` must be writable.
enum PhiStatus phi_score_sample(const struct PhiScorer *scorer,
                                const double *amounts_gbp,
                                size_t len,
                                double median,
                                double iqr,
                                struct PhiBreakdown *out);

// Run the full scoring pipeline from a TOML config file, writing the
// report bundle to the configured output directory.
//
// # Safety
// `config_path` must be a valid NUL-terminated string.
enum PhiStatus phi_run_pipeline(const char *config_path);

// Library version as a static NUL-terminated string.
const char *phi_version(void);

// Static name for a status code.
const char *phi_status_name(enum PhiStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHI_H */
