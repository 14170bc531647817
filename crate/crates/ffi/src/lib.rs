//! C ABI over `levygap`.
//!
//! Every fallible function returns an [`LgStatus`] and writes results through
//! out-pointers. Handles are opaque and must be released with the matching
//! `*_free`. On failure, [`lg_last_error_message`] describes the error for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use levygap::bounds::green_x0;
use levygap::harmonic::HarmonicEvaluator;
use levygap::speed::SpeedFunction;
use levygap::symbol::CharacteristicExponent;
use levygap::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgStatus {
    Ok = 0,
    InvalidArgument = 1,
    Domain = 2,
    NonConvergence = 3,
    InfiniteMass = 4,
    NoBound = 5,
    Unsupported = 6,
    NullPointer = 7,
    Panic = 8,
    Failure = 9,
}

/// A characteristic exponent ψ.
pub struct LgSymbol {
    inner: CharacteristicExponent,
}

/// A speed function `a` and its measure `μ(dx) = a(x)⁻¹dx`.
pub struct LgSpeed {
    inner: SpeedFunction,
}

/// Harmonic-function evaluator bound to one symbol (internally cached,
/// safe to share across threads).
pub struct LgEvaluator {
    inner: HarmonicEvaluator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> LgStatus {
    match err {
        Error::InvalidParameter(_) | Error::Config(_) | Error::Schema { .. } | Error::Json(_) => {
            LgStatus::InvalidArgument
        }
        Error::Domain(_) | Error::Extrapolation { .. } => LgStatus::Domain,
        Error::NonConvergence { .. } => LgStatus::NonConvergence,
        Error::InfiniteMass(_) => LgStatus::InfiniteMass,
        Error::NoBound(_) | Error::NotWlsc => LgStatus::NoBound,
        Error::Unsupported(_) => LgStatus::Unsupported,
        _ => LgStatus::Failure,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> LgStatus
where
    F: FnOnce() -> Result<(), LgFail>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LgStatus::Ok,
        Ok(Err(LgFail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(LgFail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            LgStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            LgStatus::Panic
        }
    }
}

enum LgFail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for LgFail {
    fn from(e: Error) -> Self {
        LgFail::Lib(e)
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, LgFail> {
    p.as_ref().ok_or(LgFail::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), LgFail> {
    if out.is_null() {
        return Err(LgFail::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn new_symbol(out: *mut *mut LgSymbol, make: impl FnOnce() -> levygap::Result<CharacteristicExponent>) -> LgStatus {
    guard(|| {
        if out.is_null() {
            return Err(LgFail::Null("out"));
        }
        let h = Box::new(LgSymbol { inner: make()? });
        write(out, Box::into_raw(h), "out")
    })
}

unsafe fn new_speed(out: *mut *mut LgSpeed, make: impl FnOnce() -> levygap::Result<SpeedFunction>) -> LgStatus {
    guard(|| {
        if out.is_null() {
            return Err(LgFail::Null("out"));
        }
        let h = Box::new(LgSpeed { inner: make()? });
        write(out, Box::into_raw(h), "out")
    })
}

/// `ψ(ξ) = |ξ|^α`, `0 < α ≤ 2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_symbol_stable(alpha: f64, out: *mut *mut LgSymbol) -> LgStatus {
    new_symbol(out, || CharacteristicExponent::stable(alpha))
}

/// `ψ(ξ) = σ²ξ²`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_symbol_brownian(sigma2: f64, out: *mut *mut LgSymbol) -> LgStatus {
    new_symbol(out, || CharacteristicExponent::brownian(sigma2))
}

/// `ψ(ξ) = c1·ξ² + c2·|ξ|^α`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_symbol_stable_mixture(c1: f64, c2: f64, alpha: f64, out: *mut *mut LgSymbol) -> LgStatus {
    new_symbol(out, || CharacteristicExponent::stable_mixture(c1, c2, alpha))
}

/// `ψ(ξ) = ξ² + |ξ|`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_symbol_cauchy_brownian(out: *mut *mut LgSymbol) -> LgStatus {
    new_symbol(out, || Ok(CharacteristicExponent::cauchy_plus_brownian()))
}

/// # Safety
/// `sym` must come from an `lg_symbol_*` constructor and not be freed yet;
/// null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lg_symbol_free(sym: *mut LgSymbol) {
    if !sym.is_null() {
        drop(Box::from_raw(sym));
    }
}

/// # Safety
/// `sym` must be a live symbol handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_symbol_eval(sym: *const LgSymbol, xi: f64, out: *mut f64) -> LgStatus {
    guard(|| {
        let s = borrow(sym, "symbol")?;
        write(out, s.inner.eval(xi)?, "out")
    })
}

/// Running maximum `ψ*(x) = sup_{|ξ| ≤ x} ψ(ξ)`, `x ≥ 0`.
///
/// # Safety
/// `sym` must be a live symbol handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_symbol_psi_star(sym: *const LgSymbol, x: f64, out: *mut f64) -> LgStatus {
    guard(|| {
        let s = borrow(sym, "symbol")?;
        write(out, s.inner.psi_star(x)?, "out")
    })
}

/// `a(x) = e^{b|x|}`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_speed_exp_growth(b: f64, out: *mut *mut LgSpeed) -> LgStatus {
    new_speed(out, || SpeedFunction::exp_growth(b))
}

/// `a(x) = c(1+|x|)^p`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_speed_poly_growth(p: f64, c: f64, out: *mut *mut LgSpeed) -> LgStatus {
    new_speed(out, || SpeedFunction::poly_growth(p, c))
}

/// # Safety
/// `sp` must come from an `lg_speed_*` constructor and not be freed yet;
/// null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lg_speed_free(sp: *mut LgSpeed) {
    if !sp.is_null() {
        drop(Box::from_raw(sp));
    }
}

/// `μ((−|x|, |x|)ᶜ)`.
///
/// # Safety
/// `sp` must be a live speed handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_speed_mu_tail(sp: *const LgSpeed, x: f64, out: *mut f64) -> LgStatus {
    guard(|| {
        let s = borrow(sp, "speed")?;
        write(out, s.inner.mu_tail(x)?, "out")
    })
}

/// `μ(ℝ)`; `LG_STATUS_INFINITE_MASS` when it diverges.
///
/// # Safety
/// `sp` must be a live speed handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_speed_mu_total(sp: *const LgSpeed, out: *mut f64) -> LgStatus {
    guard(|| {
        let s = borrow(sp, "speed")?;
        write(out, s.inner.mu_total()?, "out")
    })
}

/// Creates an evaluator for `H` (the symbol is copied).
///
/// # Safety
/// `sym` must be a live symbol handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_evaluator_new(sym: *const LgSymbol, out: *mut *mut LgEvaluator) -> LgStatus {
    guard(|| {
        let s = borrow(sym, "symbol")?;
        if out.is_null() {
            return Err(LgFail::Null("out"));
        }
        let h = Box::new(LgEvaluator {
            inner: HarmonicEvaluator::new(s.inner.clone()),
        });
        write(out, Box::into_raw(h), "out")
    })
}

/// # Safety
/// `ev` must come from [`lg_evaluator_new`] and not be freed yet; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn lg_evaluator_free(ev: *mut LgEvaluator) {
    if !ev.is_null() {
        drop(Box::from_raw(ev));
    }
}

/// `H(x)` with its absolute error estimate (`abs_err` may be null).
///
/// # Safety
/// `ev` must be a live evaluator, `value` valid for writes, `abs_err` null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_harmonic_eval(ev: *const LgEvaluator, x: f64, value: *mut f64, abs_err: *mut f64) -> LgStatus {
    guard(|| {
        let e = borrow(ev, "evaluator")?.inner.eval_h(x)?;
        write(value, e.value, "value")?;
        if !abs_err.is_null() {
            abs_err.write(e.abs_err);
        }
        Ok(())
    })
}

/// `H′(x)`, `x ≠ 0`, with its absolute error estimate (`abs_err` may be null).
///
/// # Safety
/// As for [`lg_harmonic_eval`].
#[no_mangle]
pub unsafe extern "C" fn lg_harmonic_eval_prime(
    ev: *const LgEvaluator,
    x: f64,
    value: *mut f64,
    abs_err: *mut f64,
) -> LgStatus {
    guard(|| {
        let e = borrow(ev, "evaluator")?.inner.eval_h_prime(x)?;
        write(value, e.value, "value")?;
        if !abs_err.is_null() {
            abs_err.write(e.abs_err);
        }
        Ok(())
    })
}

/// Green function of the base process killed at 0:
/// `H(x) + H(y) − H(y − x)`.
///
/// # Safety
/// `ev` must be a live evaluator and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_green_x0(ev: *const LgEvaluator, x: f64, y: f64, out: *mut f64) -> LgStatus {
    guard(|| {
        let e = borrow(ev, "evaluator")?;
        write(out, green_x0(&e.inner, x, y)?, "out")
    })
}

/// Runs the full analysis on a JSON config document and returns the report
/// document through `report_json` (release it with [`lg_string_free`]).
/// Relative table paths resolve against the working directory.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `report_json` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn lg_analyze_json(config_json: *const c_char, report_json: *mut *mut c_char) -> LgStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(LgFail::Null("config_json"));
        }
        if report_json.is_null() {
            return Err(LgFail::Null("report_json"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Error::InvalidParameter(format!("config is not UTF-8: {e}")))?;
        let report = levygap::cli::analyze_json(text, Path::new(""))?;
        let c = CString::new(report).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        write(report_json, c.into_raw(), "report_json")
    })
}

/// # Safety
/// `s` must come from this library and not be freed yet; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::InfiniteMass("x".into())), LgStatus::InfiniteMass);
        assert_eq!(status_of(&Error::NotWlsc), LgStatus::NoBound);
        assert_eq!(status_of(&Error::Config("x".into())), LgStatus::InvalidArgument);
    }

    #[test]
    fn panics_become_status() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, LgStatus::Panic);
        let msg = unsafe { CStr::from_ptr(lg_last_error_message()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }

    #[test]
    fn null_out_pointer() {
        let st = unsafe { lg_symbol_stable(1.5, ptr::null_mut()) };
        assert_eq!(st, LgStatus::NullPointer);
    }
}
