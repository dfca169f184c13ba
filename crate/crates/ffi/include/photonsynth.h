#ifndef PHOTONSYNTH_H
#define PHOTONSYNTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_ARGUMENT = 2,
  PS_STATUS_DIMENSION_MISMATCH = 3,
  PS_STATUS_DEGENERATE_TARGET = 4,
  PS_STATUS_ZERO_NORM = 5,
  PS_STATUS_EMPTY_RECORDS = 6,
  PS_STATUS_INVALID_DENSITY = 7,
  PS_STATUS_NUMERICAL = 8,
  PS_STATUS_NO_HERALD_EVENT = 9,
  PS_STATUS_SERIALIZATION = 10,
  PS_STATUS_BUFFER_TOO_SMALL = 11,
  PS_STATUS_PANIC = 12,
} PsStatus;

/**
 * Opaque density operator.
 */
typedef struct PsDensity PsDensity;

/**
 * Heralding parameters; `betas` holds three complex amplitudes as
 * `re₁, im₁, re₂, im₂, re₃, im₃`.
 */
typedef struct PsHeraldConfig {
  double q;
  double betas[6];
  size_t signal_dim;
  size_t idler_dim;
  double eta_signal;
  double eta_detector;
  double dark_prob;
} PsHeraldConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ps_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ps_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void ps_string_free(char *s);

/**
 * # Safety
 * `rho` must be null or a handle returned by this library, not yet freed.
 */
void ps_density_free(struct PsDensity *rho);

/**
 * Returns 0 for a null handle.
 *
 * # Safety
 * `rho` must be null or a live handle.
 */
size_t ps_density_dim(const struct PsDensity *rho);

/**
 * Builds a density operator from `dim*dim` row-major complex entries
 * (`2*dim*dim` doubles). The matrix must be Hermitian, unit-trace and
 * positive semidefinite.
 *
 * # Safety
 * `entries` must point to `2*dim*dim` doubles; `out` must be writable.
 */
enum PsStatus ps_density_from_entries(size_t dim, const double *entries, struct PsDensity **out);

/**
 * `|n⟩⟨n|` in a space of dimension `dim`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PsStatus ps_density_fock(size_t n, size_t dim, struct PsDensity **out);

/**
 * `|ψ⟩⟨ψ|` for `dim` complex amplitudes (normalized on the way in).
 *
 * # Safety
 * `amps` must point to `2*dim` doubles; `out` must be writable.
 */
enum PsStatus ps_density_from_pure(size_t dim, const double *amps, struct PsDensity **out);

/**
 * Copies the `dim*dim` row-major entries as `2*dim*dim` doubles.
 *
 * # Safety
 * `rho` must be a live handle; `buf` must hold `len` doubles.
 */
enum PsStatus ps_density_entries(const struct PsDensity *rho, double *buf, size_t len);

/**
 * JSON `{"dim", "entries"}` form; free the result with [`ps_string_free`].
 *
 * # Safety
 * `rho` must be a live handle; `out` must be writable.
 */
enum PsStatus ps_density_to_json(const struct PsDensity *rho, char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PsStatus ps_density_from_json(const char *json, struct PsDensity **out);

/**
 * Solves for the three displacements producing
 * `c₀|0⟩ + c₁|1⟩ + c₂|2⟩ + c₃|3⟩` at pump parameter `q`.
 * `coeffs` holds 8 doubles, `betas_out` receives 6.
 *
 * # Safety
 * Pointers must reference buffers of the stated sizes.
 */
enum PsStatus ps_solve_displacements(const double *coeffs, double q, double *betas_out);

/**
 * Unnormalized lowest-order output amplitudes for `|0⟩..|3⟩` (8 doubles).
 *
 * # Safety
 * `betas` must hold 6 doubles and `out` 8.
 */
enum PsStatus ps_perturbative_output(double q, const double *betas, double *out);

/**
 * Ideal detectors, no loss, default truncations.
 */
struct PsHeraldConfig ps_herald_config_default(double q);

/**
 * Runs triple-click heralding. `probability` and `warnings` may be null.
 *
 * # Safety
 * `config` must be readable and `out` writable.
 */
enum PsStatus ps_herald(const struct PsHeraldConfig *config,
                        struct PsDensity **out,
                        double *probability,
                        size_t *warnings);

/**
 * Applies pure loss with transmission `eta`.
 *
 * # Safety
 * `rho` must be a live handle; `out` writable.
 */
enum PsStatus ps_loss_channel(const struct PsDensity *rho, double eta, struct PsDensity **out);

/**
 * `⟨ψ|ρ|ψ⟩` for a normalized `ψ` of `dim` amplitudes (`2*dim` doubles).
 *
 * # Safety
 * `rho` must be a live handle; `amps` must hold `2*dim` doubles.
 */
enum PsStatus ps_fidelity_pure(const struct PsDensity *rho,
                               const double *amps,
                               size_t dim,
                               double *out);

/**
 * `(Tr √(√ρ σ √ρ))²`.
 *
 * # Safety
 * Both handles must be live; `out` writable.
 */
enum PsStatus ps_fidelity_mixed(const struct PsDensity *a, const struct PsDensity *b, double *out);

/**
 * # Safety
 * `rho` must be a live handle; `out` writable.
 */
enum PsStatus ps_wigner_point(const struct PsDensity *rho, double x, double p, double *out);

/**
 * Fills `buf[i*np + j] = W(x_i, p_j)` on the described grid.
 *
 * # Safety
 * `rho` must be a live handle; `buf` must hold `len` doubles.
 */
enum PsStatus ps_wigner_grid(const struct PsDensity *rho,
                             double x_min,
                             double x_max,
                             double p_min,
                             double p_max,
                             size_t nx,
                             size_t np,
                             double *buf,
                             size_t len);

/**
 * Number of separate negative stretches along the cut through the origin
 * at `angle`, with default range, sampling and threshold.
 *
 * # Safety
 * `rho` must be a live handle; `out` writable.
 */
enum PsStatus ps_wigner_negative_intervals(const struct PsDensity *rho, double angle, size_t *out);

/**
 * Draws `n` homodyne records over `phases` equally spaced phases.
 *
 * # Safety
 * `rho` must be a live handle; `theta_out` and `x_out` must hold `n` doubles.
 */
enum PsStatus ps_sample_quadratures(const struct PsDensity *rho,
                                    size_t n,
                                    size_t phases,
                                    uint64_t seed,
                                    double *theta_out,
                                    double *x_out);

/**
 * Maximum-likelihood reconstruction in dimension `dim`. `max_iters = 0`
 * selects the default. `iterations` and `converged` may be null.
 *
 * # Safety
 * `theta` and `x` must hold `n` doubles; `out` writable.
 */
enum PsStatus ps_mle_reconstruct(const double *theta,
                                 const double *x,
                                 size_t n,
                                 size_t dim,
                                 size_t max_iters,
                                 struct PsDensity **out,
                                 size_t *iterations,
                                 bool *converged);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOTONSYNTH_H */
