//! The harmonic function of the process killed at the origin,
//!
//! ```text
//! H(x) = (1/π) ∫_0^∞ (1 − cos xs) / ψ(s) ds,
//! ```
//!
//! which also equals `∫_0^∞ (p_s(0) − p_s(x)) ds` for the transition density
//! `p_s`, and its derivative `H′(x) = (1/π) ∫_0^∞ t·sin(xt)/ψ(t) dt`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{self, Estimate, QuadConfig, Trig};
use crate::symbol::{CharacteristicExponent, SymbolFamily, WlscParams};

/// `ω_α = −1/(cos(πα/2)·Γ(α))`, so that `H(x) = ω_α|x|^{α−1}/2` for `ψ = |ξ|^α`.
pub fn omega_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::domain(format!("ω_α needs α ∈ (1, 2), got {alpha}")));
    }
    Ok(-1.0 / ((PI * alpha / 2.0).cos() * gamma(alpha)))
}

/// Closed form of `H` where one is known.
pub fn h_closed_form(psi: &CharacteristicExponent, x: f64) -> Option<Result<f64>> {
    let w = x.abs();
    match *psi.family() {
        SymbolFamily::Stable { alpha: 2.0 } => Some(Ok(w / 2.0)),
        SymbolFamily::Stable { alpha } => Some(omega_alpha(alpha).map(|om| om * w.powf(alpha - 1.0) / 2.0)),
        SymbolFamily::Brownian { sigma2 } => Some(Ok(w / (2.0 * sigma2))),
        _ => None,
    }
}

/// Closed form of `H′` where one is known.
pub fn h_prime_closed_form(psi: &CharacteristicExponent, x: f64) -> Option<Result<f64>> {
    let (w, sign) = (x.abs(), x.signum());
    match *psi.family() {
        SymbolFamily::Stable { alpha: 2.0 } => Some(Ok(sign / 2.0)),
        SymbolFamily::Stable { alpha } => Some(
            omega_alpha(alpha).map(|om| sign * (alpha - 1.0) * om * w.powf(alpha - 2.0) / 2.0),
        ),
        SymbolFamily::Brownian { sigma2 } => Some(Ok(sign / (2.0 * sigma2))),
        _ => None,
    }
}

/// `10/(π·β²·(delta_s − 1)·x·ψ*(1/x))`, an explicit upper envelope for `H`
/// under weak lower scaling with exponent above one.
pub fn wlsc_h_upper(psi: &CharacteristicExponent, w: &WlscParams, x: f64) -> Result<f64> {
    if w.delta_s <= 1.0 {
        return Err(Error::domain(format!(
            "scaling envelope needs delta_s > 1, got {}",
            w.delta_s
        )));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("scaling envelope needs x > 0, got {x}")));
    }
    let ps = psi.psi_star(1.0 / x)?;
    Ok(10.0 / (PI * w.beta * w.beta * (w.delta_s - 1.0) * x * ps))
}

/// `(10/π)·log(1 + |x|)`, the envelope for `ψ(ξ) = ξ² + |ξ|`.
pub fn log_h_upper(x: f64) -> f64 {
    10.0 / PI * x.abs().ln_1p()
}

/// Rounds to 15 significant digits; cache keys and evaluation points both use
/// the rounded value so cached and fresh results coincide.
fn round15(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Memoizing evaluator of `H` and `H′`.
#[derive(Debug)]
pub struct HarmonicEvaluator {
    psi: CharacteristicExponent,
    quad: QuadConfig,
    closed_form: bool,
    h_cache: RwLock<HashMap<u64, Estimate>>,
    hp_cache: RwLock<HashMap<u64, Estimate>>,
}

impl Clone for HarmonicEvaluator {
    fn clone(&self) -> Self {
        HarmonicEvaluator::with_options(self.psi.clone(), self.quad, self.closed_form)
            .expect("configuration was validated on construction")
    }
}

impl HarmonicEvaluator {
    pub fn new(psi: CharacteristicExponent) -> Self {
        Self::with_options(psi, QuadConfig::default(), true).expect("default quadrature config is valid")
    }

    /// `closed_form = false` forces quadrature even where a closed form exists.
    pub fn with_options(psi: CharacteristicExponent, quad: QuadConfig, closed_form: bool) -> Result<Self> {
        quad.validate()?;
        Ok(HarmonicEvaluator {
            psi,
            quad,
            closed_form,
            h_cache: RwLock::new(HashMap::new()),
            hp_cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn psi(&self) -> &CharacteristicExponent {
        &self.psi
    }

    pub fn quad(&self) -> &QuadConfig {
        &self.quad
    }

    pub fn uses_closed_form(&self) -> bool {
        self.closed_form
    }

    pub fn cache_len(&self) -> usize {
        self.h_cache.read().map(|c| c.len()).unwrap_or(0)
    }

    /// `H(x)` with an absolute error estimate.
    pub fn eval_h(&self, x: f64) -> Result<Estimate> {
        if !x.is_finite() {
            return Err(Error::domain(format!("H evaluated at non-finite x = {x}")));
        }
        let w = round15(x.abs());
        if w == 0.0 {
            return Ok(Estimate::exact(0.0));
        }
        if let Some(e) = self.h_cache.read().ok().and_then(|c| c.get(&w.to_bits()).copied()) {
            return Ok(e);
        }
        let est = match self.closed_form.then(|| h_closed_form(&self.psi, w)).flatten() {
            Some(v) => Estimate::exact(v?),
            None => self.h_quadrature(w)?,
        };
        if let Ok(mut c) = self.h_cache.write() {
            c.insert(w.to_bits(), est);
        }
        Ok(est)
    }

    /// `H(x)` value only.
    pub fn h(&self, x: f64) -> Result<f64> {
        self.eval_h(x).map(|e| e.value)
    }

    /// `H′(x)`; odd in `x`.
    pub fn eval_h_prime(&self, x: f64) -> Result<Estimate> {
        if !x.is_finite() || x == 0.0 {
            return Err(Error::domain(format!("H′ needs finite x ≠ 0, got {x}")));
        }
        let w = round15(x.abs());
        let sign = x.signum();
        let cached = self.hp_cache.read().ok().and_then(|c| c.get(&w.to_bits()).copied());
        let est = match cached {
            Some(e) => e,
            None => {
                let est = match self.closed_form.then(|| h_prime_closed_form(&self.psi, w)).flatten() {
                    Some(v) => Estimate::exact(v?),
                    None => self.h_prime_quadrature(w)?,
                };
                if let Ok(mut c) = self.hp_cache.write() {
                    c.insert(w.to_bits(), est);
                }
                est
            }
        };
        Ok(Estimate {
            value: sign * est.value,
            abs_err: est.abs_err,
        })
    }

    fn h_quadrature(&self, w: f64) -> Result<Estimate> {
        let psi = &self.psi;
        let tol = self.quad.tolerance();
        let s0 = 1.0 / w;
        // 1 − cos(ws) = 2 sin²(ws/2) avoids cancellation near the origin.
        let head = quad::adaptive(
            |s| {
                let num = 2.0 * (0.5 * w * s).sin().powi(2);
                if num == 0.0 {
                    return Ok(0.0);
                }
                Ok(num / psi.eval(s)?)
            },
            0.0,
            s0,
            &tol,
        )?;
        let inv = |s: f64| -> Result<f64> { Ok(1.0 / psi.eval(s)?) };
        let flat = quad::power_tail(inv, s0, &tol)?;
        let osc = quad::oscillatory_tail(inv, w, s0, Trig::Cos, &tol, &self.quad.oscillatory())?;
        let value = (head.value + flat.value - osc.value) / PI;
        let abs_err = (head.abs_err + flat.abs_err + osc.abs_err) / PI;
        Ok(Estimate {
            value: value.max(0.0),
            abs_err,
        })
    }

    fn h_prime_quadrature(&self, w: f64) -> Result<Estimate> {
        let psi = &self.psi;
        let tol = self.quad.tolerance();
        let s0 = 1.0 / w;
        let head = quad::adaptive(
            |t| {
                let num = t * (w * t).sin();
                if num == 0.0 {
                    return Ok(0.0);
                }
                Ok(num / psi.eval(t)?)
            },
            0.0,
            s0,
            &tol,
        )?;
        let osc = quad::oscillatory_tail(
            |t| Ok(t / psi.eval(t)?),
            w,
            s0,
            Trig::Sin,
            &tol,
            &self.quad.oscillatory(),
        )?;
        Ok(Estimate {
            value: (head.value + osc.value) / PI,
            abs_err: (head.abs_err + osc.abs_err) / PI,
        })
    }
}
