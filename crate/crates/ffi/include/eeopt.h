#ifndef EEOPT_H
#define EEOPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Constant channel gain, known at the transmitter.
#define EEOPT_CASE_STATIC_CSIT 0

// Nakagami fading, transmitter knows only the distribution.
#define EEOPT_CASE_FADING_CDIT 1

// Nakagami fading, transmitter knows each realization.
#define EEOPT_CASE_FADING_CSIT 2

// Return code of every function in this interface.
typedef enum EeoptStatus {
  EEOPT_STATUS_OK = 0,
  EEOPT_STATUS_NULL_POINTER = 1,
  // A parameter was rejected when building the link.
  EEOPT_STATUS_INVALID_PARAMETER = 2,
  // An argument lies outside the domain of the evaluated function.
  EEOPT_STATUS_DOMAIN = 3,
  // An inner power or water-level solve failed.
  EEOPT_STATUS_SOLVER = 4,
  // The decision function stayed negative up to the doubling cap.
  EEOPT_STATUS_UNBOUNDED_ROOT = 5,
  // The limit equation has no finite root.
  EEOPT_STATUS_NO_ROOT = 6,
  // An expectation produced a non-finite value.
  EEOPT_STATUS_NON_FINITE = 7,
  // A Rust panic was caught at the boundary.
  EEOPT_STATUS_PANIC = 8,
} EeoptStatus;

// Opaque link handle.
typedef struct EeoptLink EeoptLink;

// Parameters of one link.
typedef struct EeoptLinkParams {
  // Bandwidth in Hz.
  double bandwidth_hz;
  // Receiver noise power in Watts.
  double noise_power_w;
  // Power amplifier efficiency in (0, 1].
  double pa_efficiency;
  // Rate-dependent circuit power coefficient.
  double kappa;
  // Static circuit power in Watts.
  double p_static_w;
  // One of the `EEOPT_CASE_*` constants.
  uint32_t case_id;
  // Channel gain (static case) or mean gain (fading cases).
  double mean_gain;
  // Nakagami shape, >= 0.5. Ignored in the static case.
  double nakagami_m;
  // Circuit power exponent: 1 for a linear circuit, > 1 for `R^alpha`.
  double alpha;
  // Quadrature node density; 0 selects the default.
  uint32_t quadrature_order;
} EeoptLinkParams;

// Optimum of the energy per bit.
typedef struct EeoptOptimum {
  // Optimal spectral efficiency in bits/s/Hz.
  double c_star;
  // Energy per bit at the optimum in J/bit.
  double ee_star;
  // Decision function evaluations.
  uint32_t iterations;
  uint32_t doublings;
  double final_bracket_width;
} EeoptOptimum;

// One sample of the tradeoff curve.
typedef struct EeoptPoint {
  double c;
  double total_power_w;
  // Energy per bit; positive infinity at `c = 0`.
  double ee;
  double gamma;
} EeoptPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Writes the near-link defaults (10 kHz, 1e-15 W noise, 40 % amplifier
// efficiency, kappa 9e-8, 188 mW static power, gain at 10 m, Rayleigh,
// linear circuit) for the given case.
//
// # Safety
// `out` must be null or point to writable memory for one `EeoptLinkParams`.
enum EeoptStatus eeopt_link_params_default(uint32_t case_id, struct EeoptLinkParams *out);

// Validates `params` and creates a link. Release it with
// [`eeopt_link_free`].
//
// # Safety
// `params` must be null or point to a valid `EeoptLinkParams`; `out` must
// be null or point to writable memory for one pointer.
enum EeoptStatus eeopt_link_new(const struct EeoptLinkParams *params, struct EeoptLink **out);

// Releases a link. Null is accepted and ignored.
//
// # Safety
// `link` must be null or a handle from [`eeopt_link_new`] not yet freed.
void eeopt_link_free(struct EeoptLink *link);

// Total consumed power `P(C)` in Watts.
//
// # Safety
// `link` must be a live handle; `out` must point to a writable double.
enum EeoptStatus eeopt_link_total_power(const struct EeoptLink *link, double c, double *out);

// Energy per bit `EE(C)` in J/bit; positive infinity at `c = 0`.
//
// # Safety
// `link` must be a live handle; `out` must point to a writable double.
enum EeoptStatus eeopt_link_ee(const struct EeoptLink *link, double c, double *out);

// Decision function `Gamma(C)` in Watts: negative below the optimum,
// positive above.
//
// # Safety
// `link` must be a live handle; `out` must point to a writable double.
enum EeoptStatus eeopt_link_gamma(const struct EeoptLink *link, double c, double *out);

// Normalized minimum transmit power `psi(C)`; multiply by the noise power
// for Watts.
//
// # Safety
// `link` must be a live handle; `out` must point to a writable double.
enum EeoptStatus eeopt_link_psi(const struct EeoptLink *link, double c, double *out);

// Bracket-and-bisect search for the optimum. `c_max` caps the bracket
// doubling; pass 0 for the default of 64 bits/s/Hz.
//
// # Safety
// `link` must be a live handle; `out` must point to a writable
// `EeoptOptimum`.
enum EeoptStatus eeopt_link_optimize(const struct EeoptLink *link,
                                     double delta,
                                     double c_max,
                                     struct EeoptOptimum *out);

// Optimal spectral efficiency as the rate-dependent circuit power
// vanishes.
//
// # Safety
// `link` must be a live handle; `out` must point to a writable double.
enum EeoptStatus eeopt_link_limit_kappa_zero(const struct EeoptLink *link, double *out);

// Optimal spectral efficiency as the noise vanishes. With `bare_argument`
// nonzero the circuit term is evaluated at `C` instead of `W C`.
//
// # Safety
// `link` must be a live handle; `out` must point to a writable double.
enum EeoptStatus eeopt_link_limit_noise_zero(const struct EeoptLink *link,
                                             int32_t bare_argument,
                                             double *out);

// Evaluates the tradeoff curve at `n` spectral efficiencies. `grid` must
// be nonnegative and strictly increasing.
//
// # Safety
// `link` must be a live handle; `grid` must point to `n` readable doubles
// and `out` to `n` writable `EeoptPoint` values.
enum EeoptStatus eeopt_link_tradeoff(const struct EeoptLink *link,
                                     const double *grid,
                                     size_t n,
                                     struct EeoptPoint *out);

// Mean channel gain `g0 * d^-path_exponent` at distance `distance_m`.
//
// # Safety
// `out` must point to a writable double.
enum EeoptStatus eeopt_mean_gain_from_distance(double distance_m,
                                               double g0,
                                               double path_exponent,
                                               double *out);

// Copies the last error message of the calling thread into `buf` (at most
// `len` bytes, NUL-terminated) and returns the full message length
// including the terminator, or 0 if no error has been recorded.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t eeopt_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *eeopt_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EEOPT_H */
