#ifndef LEVYGAP_H
#define LEVYGAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum {
  LG_STATUS_OK = 0,
  LG_STATUS_INVALID_ARGUMENT = 1,
  LG_STATUS_DOMAIN = 2,
  LG_STATUS_NON_CONVERGENCE = 3,
  LG_STATUS_INFINITE_MASS = 4,
  LG_STATUS_NO_BOUND = 5,
  LG_STATUS_UNSUPPORTED = 6,
  LG_STATUS_NULL_POINTER = 7,
  LG_STATUS_PANIC = 8,
  LG_STATUS_FAILURE = 9,
} LgStatus;

/**
 * Harmonic-function evaluator bound to one symbol (internally cached,
 * safe to share across threads).
 */
typedef struct LgEvaluator LgEvaluator;

/**
 * A speed function `a` and its measure `μ(dx) = a(x)⁻¹dx`.
 */
typedef struct LgSpeed LgSpeed;

/**
 * A characteristic exponent ψ.
 */
typedef struct LgSymbol LgSymbol;

/**
 * `ψ(ξ) = |ξ|^α`, `0 < α ≤ 2`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LgStatus lg_symbol_stable(double alpha, LgSymbol **out);

/**
 * `ψ(ξ) = σ²ξ²`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LgStatus lg_symbol_brownian(double sigma2, LgSymbol **out);

/**
 * `ψ(ξ) = c1·ξ² + c2·|ξ|^α`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LgStatus lg_symbol_stable_mixture(double c1, double c2, double alpha, LgSymbol **out);

/**
 * `ψ(ξ) = ξ² + |ξ|`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LgStatus lg_symbol_cauchy_brownian(LgSymbol **out);

/**
 * # Safety
 * `sym` must come from an `lg_symbol_*` constructor and not be freed yet;
 * null is ignored.
 */
void lg_symbol_free(LgSymbol *sym);

/**
 * # Safety
 * `sym` must be a live symbol handle and `out` valid for writes.
 */
LgStatus lg_symbol_eval(const LgSymbol *sym, double xi, double *out);

/**
 * Running maximum `ψ*(x) = sup_{|ξ| ≤ x} ψ(ξ)`, `x ≥ 0`.
 *
 * # Safety
 * `sym` must be a live symbol handle and `out` valid for writes.
 */
LgStatus lg_symbol_psi_star(const LgSymbol *sym, double x, double *out);

/**
 * `a(x) = e^{b|x|}`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LgStatus lg_speed_exp_growth(double b, LgSpeed **out);

/**
 * `a(x) = c(1+|x|)^p`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LgStatus lg_speed_poly_growth(double p, double c, LgSpeed **out);

/**
 * # Safety
 * `sp` must come from an `lg_speed_*` constructor and not be freed yet;
 * null is ignored.
 */
void lg_speed_free(LgSpeed *sp);

/**
 * `μ((−|x|, |x|)ᶜ)`.
 *
 * # Safety
 * `sp` must be a live speed handle and `out` valid for writes.
 */
LgStatus lg_speed_mu_tail(const LgSpeed *sp, double x, double *out);

/**
 * `μ(ℝ)`; `LG_STATUS_INFINITE_MASS` when it diverges.
 *
 * # Safety
 * `sp` must be a live speed handle and `out` valid for writes.
 */
LgStatus lg_speed_mu_total(const LgSpeed *sp, double *out);

/**
 * Creates an evaluator for `H` (the symbol is copied).
 *
 * # Safety
 * `sym` must be a live symbol handle and `out` valid for writes.
 */
LgStatus lg_evaluator_new(const LgSymbol *sym, LgEvaluator **out);

/**
 * # Safety
 * `ev` must come from [`lg_evaluator_new`] and not be freed yet; null is
 * ignored.
 */
void lg_evaluator_free(LgEvaluator *ev);

/**
 * `H(x)` with its absolute error estimate (`abs_err` may be null).
 *
 * # Safety
 * `ev` must be a live evaluator, `value` valid for writes, `abs_err` null or
 * valid for writes.
 */
LgStatus lg_harmonic_eval(const LgEvaluator *ev, double x, double *value, double *abs_err);

/**
 * `H′(x)`, `x ≠ 0`, with its absolute error estimate (`abs_err` may be null).
 *
 * # Safety
 * As for [`lg_harmonic_eval`].
 */
LgStatus lg_harmonic_eval_prime(const LgEvaluator *ev, double x, double *value, double *abs_err);

/**
 * Green function of the base process killed at 0:
 * `H(x) + H(y) − H(y − x)`.
 *
 * # Safety
 * `ev` must be a live evaluator and `out` valid for writes.
 */
LgStatus lg_green_x0(const LgEvaluator *ev, double x, double y, double *out);

/**
 * Runs the full analysis on a JSON config document and returns the report
 * document through `report_json` (release it with [`lg_string_free`]).
 * Relative table paths resolve against the working directory.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `report_json` valid for
 * writes.
 */
LgStatus lg_analyze_json(const char *config_json, char **report_json);

/**
 * # Safety
 * `s` must come from this library and not be freed yet; null is ignored.
 */
void lg_string_free(char *s);

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *lg_last_error_message(void);

#endif  /* LEVYGAP_H */
