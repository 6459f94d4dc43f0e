#ifndef SEPSTAB_H
#define SEPSTAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SepstabStatus {
  SEPSTAB_STATUS_OK = 0,
  SEPSTAB_STATUS_NULL_POINTER = 1,
  SEPSTAB_STATUS_INVALID_UTF8 = 2,
  SEPSTAB_STATUS_BUFFER_TOO_SMALL = 3,
  SEPSTAB_STATUS_PANIC = 4,
  SEPSTAB_STATUS_NON_UNIT_NORM = 10,
  SEPSTAB_STATUS_INVALID_DIMS = 11,
  SEPSTAB_STATUS_DIMENSION_MISMATCH = 12,
  SEPSTAB_STATUS_NOT_HERMITIAN = 13,
  SEPSTAB_STATUS_NOT_DENSITY_MATRIX = 14,
  SEPSTAB_STATUS_NOT_UNBIASED_BASIS = 15,
  SEPSTAB_STATUS_NOT_CPTP = 16,
  SEPSTAB_STATUS_INVALID_PARAMETERS = 17,
  SEPSTAB_STATUS_UNSUPPORTED_DIMENSION = 18,
  SEPSTAB_STATUS_DIMENSION_CAP = 19,
  SEPSTAB_STATUS_INVALID_ORDER = 20,
  SEPSTAB_STATUS_INVALID_CUT = 21,
  SEPSTAB_STATUS_PARSE_ERROR = 22,
  SEPSTAB_STATUS_VALIDATION_ERROR = 23,
  SEPSTAB_STATUS_IO_ERROR = 24,
} SepstabStatus;

// Which projector of a bipartite pair to read.
typedef enum SepstabProjector {
  SEPSTAB_PROJECTOR_P = 0,
  SEPSTAB_PROJECTOR_Q = 1,
} SepstabProjector;

typedef struct SepstabChannel SepstabChannel;

typedef struct SepstabDensity SepstabDensity;

typedef struct SepstabFamily SepstabFamily;

typedef struct SepstabKet SepstabKet;

typedef struct SepstabStabilizer SepstabStabilizer;

typedef struct SepstabResiduals {
  double p_psi;
  double q_psi;
  double pq_minus_psi;
  double qp_minus_psi;
  double commutator;
  double pqp_minus_psi;
  double idempotence;
  // Smallest eigenvalue of `(1 - P) + (1 - Q) - (1 - psi)`.
  double inequality_min_eigenvalue;
  bool passed;
} SepstabResiduals;

typedef struct SepstabFamilyReport {
  double product;
  double sibling_commutator;
  double split;
  double inequality_min_eigenvalue;
  double separability;
  double projector;
  bool passed;
} SepstabFamilyReport;

typedef struct SepstabCertifyOptions {
  double epsilon;
  double delta;
  uint64_t seed;
  // Samples per test; 0 selects the Hoeffding count.
  uint64_t samples;
} SepstabCertifyOptions;

typedef struct SepstabCertificate {
  size_t tests;
  uint64_t samples_per_test;
  double plug_in_bound;
  double confidence_adjusted_bound;
  double exact_bound;
  double fidelity_squared;
} SepstabCertificate;

typedef struct SepstabChannelBound {
  double ent_fidelity_sq;
  double ensemble_term_schmidt;
  double ensemble_term_conj;
  double bound;
  double identity_residual_p;
  double identity_residual_q;
  // The remaining fields are set only by the sampled variant.
  bool has_sampled;
  uint64_t samples_per_term;
  double mean_schmidt;
  double mean_conj;
  double adjusted_bound;
  bool passed;
} SepstabChannelBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *sepstab_version(void);

// Message of the last failed call on this thread, or an empty string.
// Valid until the next call on the same thread.
const char *sepstab_last_error(void);

// Hoeffding sample count per test for `tests` tests.
//
// # Safety
// `out` must be a valid pointer.
enum SepstabStatus sepstab_hoeffding_samples(double epsilon,
                                             double delta,
                                             size_t tests,
                                             uint64_t *out);

// Local measurement settings per party for `n` qudits of dimension `d`.
//
// # Safety
// `out` must hold `cap` values; `len` may be null.
enum SepstabStatus sepstab_measurement_count(size_t n,
                                             size_t d,
                                             uint64_t *out,
                                             size_t cap,
                                             size_t *len);

// A pure state from `2 * dim` interleaved amplitudes, `dim` being the
// product of `dims`. With `normalize` the vector is rescaled; otherwise it
// must already have unit norm.
//
// # Safety
// Array arguments must hold the stated number of elements.
enum SepstabStatus sepstab_ket_new(const double *amplitudes,
                                   size_t amplitudes_len,
                                   const size_t *dims,
                                   size_t n_dims,
                                   bool normalize,
                                   struct SepstabKet **out);

// Haar-random pure state from the ChaCha20 generator seeded with `seed`.
//
// # Safety
// `dims` must hold `n_dims` values.
enum SepstabStatus sepstab_ket_random(const size_t *dims,
                                      size_t n_dims,
                                      uint64_t seed,
                                      struct SepstabKet **out);

// # Safety
// `ket` must be null or a handle from this library.
size_t sepstab_ket_dim(const struct SepstabKet *ket);

// Interleaved amplitudes, `2 * dim` doubles.
//
// # Safety
// `out` must hold `cap` doubles; `len` may be null.
enum SepstabStatus sepstab_ket_amplitudes(const struct SepstabKet *ket,
                                          double *out,
                                          size_t cap,
                                          size_t *len);

// # Safety
// `ket` must be null or a handle not yet freed.
void sepstab_ket_free(struct SepstabKet *ket);

// A density matrix from `2 * dim * dim` interleaved row-major entries.
// Hermiticity, unit trace and positivity are checked.
//
// # Safety
// Array arguments must hold the stated number of elements.
enum SepstabStatus sepstab_density_new(const double *matrix,
                                       size_t matrix_len,
                                       const size_t *dims,
                                       size_t n_dims,
                                       struct SepstabDensity **out);

// `|psi><psi|`.
//
// # Safety
// `ket` must be a valid handle.
enum SepstabStatus sepstab_density_from_ket(const struct SepstabKet *ket,
                                            struct SepstabDensity **out);

// `(1 - p) |psi><psi| + p 1/dim`.
//
// # Safety
// `ket` must be a valid handle.
enum SepstabStatus sepstab_density_depolarize(const struct SepstabKet *ket,
                                              double p,
                                              struct SepstabDensity **out);

// The channel applied to one tensor factor of `rho`.
//
// # Safety
// Handles must be valid.
enum SepstabStatus sepstab_density_apply_channel(const struct SepstabDensity *rho,
                                                 const struct SepstabChannel *channel,
                                                 size_t factor,
                                                 struct SepstabDensity **out);

// `tr(rho |psi><psi|)`.
//
// # Safety
// Handles must be valid; `out` must be a valid pointer.
enum SepstabStatus sepstab_density_fidelity_squared(const struct SepstabDensity *rho,
                                                    const struct SepstabKet *ket,
                                                    double *out);

// # Safety
// `rho` must be null or a handle not yet freed.
void sepstab_density_free(struct SepstabDensity *rho);

// The `(P, Q)` pair for the cut after the first `cut` factors, with the
// Fourier conjugate basis, or with the `d_A x d_A` row-major phase table
// `phases` when it is non-null.
//
// # Safety
// `ket` must be a valid handle; `phases` null or holding `phases_dim^2` values.
enum SepstabStatus sepstab_stabilizer_new(const struct SepstabKet *ket,
                                          size_t cut,
                                          const double *phases,
                                          size_t phases_dim,
                                          struct SepstabStabilizer **out);

// Total dimension of the space the projectors act on.
//
// # Safety
// `stab` must be null or a valid handle.
size_t sepstab_stabilizer_dim(const struct SepstabStabilizer *stab);

// `P` or `Q` as `2 * dim * dim` interleaved row-major doubles.
//
// # Safety
// `out` must hold `cap` doubles; `len` may be null.
enum SepstabStatus sepstab_stabilizer_projector(const struct SepstabStabilizer *stab,
                                                enum SepstabProjector which,
                                                double *out,
                                                size_t cap,
                                                size_t *len);

// Schmidt coefficients `lambda_j` in decreasing order, one per Schmidt pair.
//
// # Safety
// `out` must hold `cap` doubles; `len` may be null.
enum SepstabStatus sepstab_stabilizer_schmidt_coefficients(const struct SepstabStabilizer *stab,
                                                           double *out,
                                                           size_t cap,
                                                           size_t *len);

// Identity residuals and the operator-inequality gap.
//
// # Safety
// `stab` must be a valid handle; `out` a valid pointer.
enum SepstabStatus sepstab_stabilizer_verify(const struct SepstabStabilizer *stab,
                                             struct SepstabResiduals *out);

// `tr(rho P) + tr(rho Q) - 1`.
//
// # Safety
// Handles must be valid; `out` a valid pointer.
enum SepstabStatus sepstab_stabilizer_fidelity_bound(const struct SepstabStabilizer *stab,
                                                     const struct SepstabDensity *rho,
                                                     double *out);

// # Safety
// `stab` must be null or a handle not yet freed.
void sepstab_stabilizer_free(struct SepstabStabilizer *stab);

// The `2^(n-1)` leaf projectors along `order`; a null `order` means the
// natural order. `dim_cap` of 0 selects the default cap.
//
// # Safety
// `ket` must be a valid handle; `order` null or holding `n_order` values.
enum SepstabStatus sepstab_family_new(const struct SepstabKet *ket,
                                      const size_t *order,
                                      size_t n_order,
                                      size_t dim_cap,
                                      struct SepstabFamily **out);

// # Safety
// `fam` must be null or a valid handle.
size_t sepstab_family_leaf_count(const struct SepstabFamily *fam);

// # Safety
// `fam` must be a valid handle; `out` a valid pointer.
enum SepstabStatus sepstab_family_verify(const struct SepstabFamily *fam,
                                         struct SepstabFamilyReport *out);

// `sum_u tr(rho P^(u)) - (2^(n-1) - 1)`.
//
// # Safety
// Handles must be valid; `out` a valid pointer.
enum SepstabStatus sepstab_family_fidelity_bound(const struct SepstabFamily *fam,
                                                 const struct SepstabDensity *rho,
                                                 double *out);

// # Safety
// `fam` must be null or a handle not yet freed.
void sepstab_family_free(struct SepstabFamily *fam);

// Samples the P and Q tests on `rho` and returns the Hoeffding certificate.
//
// # Safety
// Handles and pointers must be valid.
enum SepstabStatus sepstab_certify_stabilizer(const struct SepstabStabilizer *stab,
                                              const struct SepstabDensity *rho,
                                              const struct SepstabCertifyOptions *options,
                                              struct SepstabCertificate *out);

// Samples every leaf test of the family on `rho`.
//
// # Safety
// Handles and pointers must be valid.
enum SepstabStatus sepstab_certify_family(const struct SepstabFamily *fam,
                                          const struct SepstabDensity *rho,
                                          const struct SepstabCertifyOptions *options,
                                          struct SepstabCertificate *out);

// A built-in channel: "identity", "depolarizing", "dephasing",
// "amplitude-damping" or "bit-flip".
//
// # Safety
// `name` must be a NUL-terminated string.
enum SepstabStatus sepstab_channel_builtin(const char *name,
                                           size_t d,
                                           double p,
                                           struct SepstabChannel **out);

// A channel from `count` Kraus operators of shape `dim_out x dim_in`,
// stored back to back as interleaved row-major doubles.
//
// # Safety
// `kraus` must hold `2 * count * dim_out * dim_in` doubles.
enum SepstabStatus sepstab_channel_new(const double *kraus,
                                       size_t count,
                                       size_t dim_out,
                                       size_t dim_in,
                                       struct SepstabChannel **out);

// # Safety
// `chan` must be null or a handle not yet freed.
void sepstab_channel_free(struct SepstabChannel *chan);

// Entanglement-fidelity bound of a channel acting on the second side of
// the stabilizer's cut, from exact probe fidelities.
//
// # Safety
// Handles and pointers must be valid.
enum SepstabStatus sepstab_channel_bound_exact(const struct SepstabChannel *chan,
                                               const struct SepstabStabilizer *stab,
                                               struct SepstabChannelBound *out);

// As [`sepstab_channel_bound_exact`], plus a sampled estimate of both
// ensemble terms with its confidence-adjusted bound.
//
// # Safety
// Handles and pointers must be valid.
enum SepstabStatus sepstab_channel_bound_sampled(const struct SepstabChannel *chan,
                                                 const struct SepstabStabilizer *stab,
                                                 double epsilon,
                                                 double delta,
                                                 uint64_t seed,
                                                 struct SepstabChannelBound *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEPSTAB_H */
