//! Ergodicity functionals and the rate bounds built from them.
//!
//! * `δ = sup_x H(x)·μ((−|x|, |x|)ᶜ)` gives `λ₁ ≥ 1/(8δ)`.
//! * `I = ∫ H(|x|) a(x)⁻¹ dx` gives `κ ≥ 1/(2I)` and `sup_x E_x τ_0 ≤ 2I`.
//! * `δ₊ = sup_{x>0} H(x)μ((x, ∞))`, `δ₋` its mirror, bracket
//!   `1/(8δ) ≤ λ₀ ≤ 1/δ₊ + 1/δ₋`.
//! * `G_X⁰(x, y) = H(x) + H(y) − H(y − x)` and `G_Y⁰f(x) = ∫ G_X⁰(x, y) f(y) μ(dy)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{omega_alpha, HarmonicEvaluator};
use crate::optimize::{log_grid, scan_inf, scan_sup, Extremum, ScanConfig};
use crate::quad::{Estimate, QuadConfig, Tolerance};
use crate::speed::SpeedFunction;
use crate::symbol::{
    check_conditions, fit_wlsc, CharacteristicExponent, ConditionConfig, ConditionReport, SymbolFamily,
    Verdict, WlscGrids, WlscParams,
};

/// A supremum over `x > 0` together with where it was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sup {
    pub value: f64,
    pub at: f64,
    /// The objective was still rising at the end of the scan range.
    pub possibly_infinite: bool,
}

impl From<Extremum> for Sup {
    fn from(e: Extremum) -> Self {
        Sup {
            value: e.value,
            at: e.at,
            possibly_infinite: e.unbounded_at_edge || !e.value.is_finite(),
        }
    }
}

impl Sup {
    /// The value, if it is a usable finite positive number.
    pub fn finite(&self) -> Option<f64> {
        (!self.possibly_infinite && self.value.is_finite() && self.value > 0.0).then_some(self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaValues {
    pub delta: Sup,
    pub delta_plus: Sup,
    pub delta_minus: Sup,
}

/// `sup_{x>0} h(x)·tail(x)`.
pub fn sup_product<H, T>(h: H, tail: T, scan: &ScanConfig) -> Result<Sup>
where
    H: Fn(f64) -> Result<f64> + Sync,
    T: Fn(f64) -> Result<f64> + Sync,
{
    let ext = scan_sup(
        |x| {
            let t = tail(x)?;
            if t == 0.0 {
                return Ok(0.0);
            }
            Ok(h(x)? * t)
        },
        scan,
    )?;
    Ok(ext.into())
}

/// `δ`, `δ₊` and `δ₋`.
pub fn compute_delta(ev: &HarmonicEvaluator, sp: &SpeedFunction, scan: &ScanConfig) -> Result<DeltaValues> {
    let h = |x: f64| ev.h(x);
    let delta = sup_product(h, |x| sp.mu_tail(x), scan)?;
    let delta_plus = sup_product(h, |x| sp.mu_right(x), scan)?;
    let delta_minus = if sp.is_symmetric() {
        delta_plus
    } else {
        sup_product(h, |x| sp.mu_left(-x), scan)?
    };
    Ok(DeltaValues {
        delta,
        delta_plus,
        delta_minus,
    })
}

/// `1/(8δ)`.
pub fn lambda1_lower(delta: f64) -> Result<f64> {
    if delta > 0.0 && delta.is_finite() {
        Ok(1.0 / (8.0 * delta))
    } else {
        Err(Error::NoBound(format!("δ = {delta} is not finite and positive")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IValues {
    pub i_value: Estimate,
    pub kappa_lower: f64,
    pub m0_upper: f64,
}

/// `I = ∫ H(|x|) μ(dx)`, `κ ≥ 1/(2I)`, `M₀ ≤ 2I`.
pub fn compute_i_and_kappa(ev: &HarmonicEvaluator, sp: &SpeedFunction, tol: &Tolerance) -> Result<IValues> {
    let i = match sp.mu_integral(|y| ev.h(y), &[], tol) {
        Ok(i) => i,
        Err(Error::NonConvergence { partial, .. }) => {
            return Err(Error::NoBound(format!(
                "I = ∫ H dμ diverges (partial value {partial:e}); not strongly ergodic by this criterion"
            )))
        }
        Err(e) => return Err(e),
    };
    if !(i.value > 0.0 && i.value.is_finite()) {
        return Err(Error::NoBound(format!("I = {} is not finite and positive", i.value)));
    }
    Ok(IValues {
        i_value: i,
        kappa_lower: 1.0 / (2.0 * i.value),
        m0_upper: 2.0 * i.value,
    })
}

/// `(1/(8δ), 1/δ₊ + 1/δ₋)`; a side is absent when its inputs are not finite.
pub fn lambda0_bracket(d: &DeltaValues) -> (Option<f64>, Option<f64>) {
    let lower = d.delta.finite().map(|v| 1.0 / (8.0 * v));
    let upper = match (d.delta_plus.finite(), d.delta_minus.finite()) {
        (Some(p), Some(m)) => Some(1.0 / p + 1.0 / m),
        _ => None,
    };
    (lower, upper)
}

/// `G_X⁰(x, y) = H(x) + H(y) − H(y − x)`, clamped at zero against rounding.
pub fn green_x0(ev: &HarmonicEvaluator, x: f64, y: f64) -> Result<f64> {
    Ok((ev.h(x)? + ev.h(y)? - ev.h(y - x)?).max(0.0))
}

/// `G_Y⁰f(x) = ∫ G_X⁰(x, y) f(y) a(y)⁻¹ dy`.
pub fn green_y0_apply<F>(
    ev: &HarmonicEvaluator,
    sp: &SpeedFunction,
    f: F,
    x: f64,
    tol: &Tolerance,
) -> Result<Estimate>
where
    F: Fn(f64) -> Result<f64>,
{
    let hx = ev.h(x)?;
    let r = x.abs();
    sp.mu_integral(
        |y| {
            let fy = f(y)?;
            if fy == 0.0 {
                return Ok(0.0);
            }
            let g = (hx + ev.h(y)? - ev.h(y - x)?).max(0.0);
            Ok(g * fy)
        },
        &[-r, r],
        tol,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// `min_x f(x)/G_Y⁰f(x)` over the grid.
    pub value: f64,
    pub at: f64,
    pub grid_points: usize,
}

/// `min over the grid of f(x)/G_Y⁰f(x)`, a lower bound for `λ₀` up to grid and
/// quadrature resolution.
pub fn variational_lower_certificate<F>(
    ev: &HarmonicEvaluator,
    sp: &SpeedFunction,
    f: F,
    grid: &[f64],
    tol: &Tolerance,
) -> Result<Certificate>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    if grid.is_empty() {
        return Err(Error::invalid("certificate grid is empty"));
    }
    let ratios: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let fx = f(x)?;
            if !(fx > 0.0) {
                return Err(Error::invalid(format!(
                    "test function must be positive off the origin, got f({x}) = {fx}"
                )));
            }
            let g = green_y0_apply(ev, sp, &f, x, tol)?;
            Ok((fx / g.value, x))
        })
        .collect::<Result<_>>()?;
    let (value, at) = ratios
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("grid is nonempty");
    Ok(Certificate {
        value,
        at,
        grid_points: grid.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WlscBounds {
    pub params: WlscParams,
    pub lambda1_lower_wlsc: Option<f64>,
    /// `inf_x |x|ψ*(1/|x|)/μ((−|x|, |x|)ᶜ)`.
    pub inf_ratio: f64,
    pub inf_at: f64,
    pub kappa_lower_wlsc: Option<f64>,
    /// `∫ (|x| a(x) ψ*(1/|x|))⁻¹ dx`.
    pub kappa_integral: Option<Estimate>,
}

/// Explicit bounds from weak lower scaling:
///
/// ```text
/// λ₁ ≥ π(δ_s − 1)β²/80 · inf_x |x|ψ*(1/|x|)/μ((−|x|, |x|)ᶜ)
/// κ  ≥ πβ²(δ_s − 1) / (20 ∫ (|x| a(x) ψ*(1/|x|))⁻¹ dx)
/// ```
pub fn wlsc_bounds(
    psi: &CharacteristicExponent,
    w: &WlscParams,
    sp: &SpeedFunction,
    scan: &ScanConfig,
    tol: &Tolerance,
) -> Result<WlscBounds> {
    if w.delta_s <= 1.0 {
        return Err(Error::domain(format!(
            "scaling bounds need delta_s > 1, got {}",
            w.delta_s
        )));
    }
    let k = w.beta * w.beta * (w.delta_s - 1.0);
    let inf = scan_inf(
        |x| {
            let t = sp.mu_tail(x)?;
            let num = x * psi.psi_star(1.0 / x)?;
            Ok(if t == 0.0 { f64::INFINITY } else { num / t })
        },
        scan,
    )?;
    let lambda1 = (!inf.unbounded_at_edge && inf.value.is_finite() && inf.value > 0.0)
        .then(|| PI * k / 80.0 * inf.value);
    let integral = sp
        .mu_integral(
            |y| {
                if y == 0.0 {
                    return Ok(0.0);
                }
                let r = y.abs();
                Ok(1.0 / (r * psi.psi_star(1.0 / r)?))
            },
            &[],
            tol,
        )
        .ok();
    let kappa = integral
        .filter(|e| e.value > 0.0 && e.value.is_finite())
        .map(|e| PI * k / (20.0 * e.value));
    Ok(WlscBounds {
        params: *w,
        lambda1_lower_wlsc: lambda1,
        inf_ratio: inf.value,
        inf_at: inf.at,
        kappa_lower_wlsc: kappa,
        kappa_integral: integral,
    })
}

/// Bounds that use a family-specific form of `H` or of its envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyBounds {
    pub family: String,
    pub lambda1_lower: Option<f64>,
    pub kappa_lower: Option<f64>,
    /// The family functional entering the `λ₁` bound (`δ₁`, `δ₂`, or the
    /// infimum of the mixture envelope ratio).
    pub sup_or_inf: f64,
    /// The family integral entering the `κ` bound (`I₁`, `I₂`, …).
    pub integral: Option<f64>,
}

/// Stable: `δ₁ = sup |x|^{α−1}μ-tail`, `λ₁ ≥ 1/(4ω_α δ₁)`;
/// `I₁ = ∫ a⁻¹|x|^{α−1}`, `κ ≥ 1/(ω_α I₁)`.
pub fn stable_family_bounds(alpha: f64, sp: &SpeedFunction, scan: &ScanConfig, tol: &Tolerance) -> Result<FamilyBounds> {
    let om = omega_alpha(alpha)?;
    let d1 = sup_product(|x| Ok(x.powf(alpha - 1.0)), |x| sp.mu_tail(x), scan)?;
    let i1 = sp.mu_integral(|y| Ok(y.abs().powf(alpha - 1.0)), &[], tol).ok();
    Ok(FamilyBounds {
        family: "stable".into(),
        lambda1_lower: d1.finite().map(|d| 1.0 / (4.0 * om * d)),
        kappa_lower: i1.map(|i| 1.0 / (om * i.value)),
        sup_or_inf: d1.value,
        integral: i1.map(|i| i.value),
    })
}

/// `ψ = ξ² + |ξ|` with `H ≤ (10/π)log(1+|x|)`:
/// `λ₁ ≥ π/(80δ₂)`, `κ ≥ π/(20 I₂)`.
pub fn cauchy_brownian_family_bounds(sp: &SpeedFunction, scan: &ScanConfig, tol: &Tolerance) -> Result<FamilyBounds> {
    let d2 = sup_product(|x| Ok(x.ln_1p()), |x| sp.mu_tail(x), scan)?;
    let i2 = sp.mu_integral(|y| Ok(y.abs().ln_1p()), &[], tol).ok();
    Ok(FamilyBounds {
        family: "cauchy_brownian".into(),
        lambda1_lower: d2.finite().map(|d| PI / (80.0 * d)),
        kappa_lower: i2.map(|i| PI / (20.0 * i.value)),
        sup_or_inf: d2.value,
        integral: i2.map(|i| i.value),
    })
}

/// `ψ = c₁ξ² + c₂|ξ|^α`:
/// `λ₁ ≥ π(α−1)/80 · inf_x (c₁|x|⁻¹ + c₂|x|^{1−α})/μ-tail`,
/// `κ ≥ π(α−1)/(20 ∫ a⁻¹ (c₁|x|⁻¹ + c₂|x|^{1−α})⁻¹)`.
pub fn mixture_family_bounds(
    c1: f64,
    c2: f64,
    alpha: f64,
    sp: &SpeedFunction,
    scan: &ScanConfig,
    tol: &Tolerance,
) -> Result<FamilyBounds> {
    let env = move |r: f64| c1 / r + c2 * r.powf(1.0 - alpha);
    let inf = scan_inf(
        |x| {
            let t = sp.mu_tail(x)?;
            Ok(if t == 0.0 { f64::INFINITY } else { env(x) / t })
        },
        scan,
    )?;
    let integral = sp
        .mu_integral(|y| Ok(if y == 0.0 { 0.0 } else { 1.0 / env(y.abs()) }), &[], tol)
        .ok();
    Ok(FamilyBounds {
        family: "stable_mixture".into(),
        lambda1_lower: (!inf.unbounded_at_edge && inf.value.is_finite())
            .then(|| PI * (alpha - 1.0) / 80.0 * inf.value),
        kappa_lower: integral.map(|i| PI * (alpha - 1.0) / (20.0 * i.value)),
        sup_or_inf: inf.value,
        integral: integral.map(|i| i.value),
    })
}

/// Dispatches to the family-specific bounds where one exists.
pub fn family_bounds(
    psi: &CharacteristicExponent,
    sp: &SpeedFunction,
    scan: &ScanConfig,
    tol: &Tolerance,
) -> Result<Option<FamilyBounds>> {
    Ok(match *psi.family() {
        SymbolFamily::Stable { alpha } if alpha > 1.0 && alpha < 2.0 => {
            Some(stable_family_bounds(alpha, sp, scan, tol)?)
        }
        SymbolFamily::StableMixture { c1, c2, alpha } if alpha > 1.0 => {
            Some(mixture_family_bounds(c1, c2, alpha, sp, scan, tol)?)
        }
        SymbolFamily::CauchyPlusBrownian => Some(cauchy_brownian_family_bounds(sp, scan, tol)?),
        _ => None,
    })
}

/// Sample of the objective curves on the scan grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub h: f64,
    pub mu_tail: f64,
    pub mu_right: f64,
    pub mu_left: f64,
    pub objective: f64,
}

pub fn objective_curve(ev: &HarmonicEvaluator, sp: &SpeedFunction, scan: &ScanConfig) -> Result<Vec<CurvePoint>> {
    use rayon::prelude::*;
    log_grid(scan.lo, scan.hi, scan.points)
        .into_par_iter()
        .map(|x| {
            let h = ev.h(x)?;
            let mu_tail = sp.mu_tail(x)?;
            Ok(CurvePoint {
                x,
                h,
                mu_tail,
                mu_right: sp.mu_right(x)?,
                mu_left: sp.mu_left(-x)?,
                objective: h * mu_tail,
            })
        })
        .collect()
}

/// Result of checking `G_Y⁰√H ≤ 8δ√H` along a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EightDeltaCheck {
    /// `max_x G_Y⁰√H(x) / (8δ√H(x))`; at most 1 up to quadrature error.
    pub max_ratio: f64,
    pub at: f64,
    pub certificate: Certificate,
}

/// Evaluates `G_Y⁰√H` on `grid` once and derives both the variational
/// certificate for `f = √H` and the pointwise `8δ` check.
pub fn sqrt_h_check(
    ev: &HarmonicEvaluator,
    sp: &SpeedFunction,
    delta: f64,
    grid: &[f64],
    tol: &Tolerance,
) -> Result<EightDeltaCheck> {
    use rayon::prelude::*;
    if grid.is_empty() {
        return Err(Error::invalid("check grid is empty"));
    }
    let f = |y: f64| ev.h(y).map(f64::sqrt);
    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let fx = f(x)?;
            let g = green_y0_apply(ev, sp, f, x, tol)?.value;
            Ok((x, fx, g))
        })
        .collect::<Result<_>>()?;
    let (mut max_ratio, mut max_at) = (f64::NEG_INFINITY, grid[0]);
    let (mut cert, mut cert_at) = (f64::INFINITY, grid[0]);
    for &(x, fx, g) in &rows {
        let r = g / (8.0 * delta * fx);
        if r > max_ratio {
            max_ratio = r;
            max_at = x;
        }
        if fx / g < cert {
            cert = fx / g;
            cert_at = x;
        }
    }
    Ok(EightDeltaCheck {
        max_ratio,
        at: max_at,
        certificate: Certificate {
            value: cert,
            at: cert_at,
            grid_points: grid.len(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub scan: ScanConfig,
    /// Tolerance for `I`, `G_Y⁰` and the other μ-integrals.
    pub integral_atol: f64,
    pub integral_rtol: f64,
    /// Fit and evaluate the weak-lower-scaling bounds.
    pub wlsc: bool,
    /// Points of the `√H` check grid (0 disables it).
    pub certificate_points: usize,
    pub certificate_lo: f64,
    pub certificate_hi: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            scan: ScanConfig::default(),
            integral_atol: 1e-10,
            integral_rtol: 1e-8,
            wlsc: true,
            certificate_points: 16,
            certificate_lo: 1e-2,
            certificate_hi: 1e2,
        }
    }
}

impl BoundsConfig {
    pub fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.integral_atol, self.integral_rtol)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scan;
        if !(s.lo > 0.0 && s.hi > s.lo && s.points >= 3) {
            return Err(Error::Config(format!("bad scan grid {s:?}")));
        }
        if !(self.integral_atol >= 0.0 && self.integral_rtol >= 0.0) || self.integral_atol + self.integral_rtol == 0.0 {
            return Err(Error::Config("integral tolerances must be nonnegative, not both zero".into()));
        }
        if self.certificate_points > 0 && !(self.certificate_lo > 0.0 && self.certificate_hi > self.certificate_lo) {
            return Err(Error::Config("certificate range must satisfy 0 < lo < hi".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the canonical configuration, set by the caller.
    pub config_hash: String,
    pub quad: QuadConfig,
    pub bounds: BoundsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityReport {
    pub symbol: String,
    pub speed: String,
    pub mu_total: f64,
    pub conditions: ConditionReport,
    pub delta: Sup,
    pub delta_plus: Sup,
    pub delta_minus: Sup,
    pub lambda1_lower: Option<f64>,
    pub i_value: Option<Estimate>,
    pub kappa_lower: Option<f64>,
    pub m0_upper: Option<f64>,
    pub lambda0_lower: Option<f64>,
    pub lambda0_upper: Option<f64>,
    pub wlsc: Option<WlscBounds>,
    pub family_bounds: Option<FamilyBounds>,
    pub sqrt_h_check: Option<EightDeltaCheck>,
    pub diagnostics: Vec<String>,
    pub provenance: Provenance,
    #[serde(skip)]
    pub curve: Vec<CurvePoint>,
}

impl ErgodicityReport {
    /// At least one of the `λ₁` and `κ` bounds was derived.
    pub fn has_bound(&self) -> bool {
        self.lambda1_lower.is_some() || self.kappa_lower.is_some()
    }
}

/// Full pipeline: conditions, `δ`-family, `I`, bracket, optional scaling
/// bounds, family bounds and the `√H` check.
pub fn analyze(
    psi: &CharacteristicExponent,
    sp: &SpeedFunction,
    quad: &QuadConfig,
    cfg: &BoundsConfig,
) -> Result<ErgodicityReport> {
    cfg.validate()?;
    let mut diagnostics = Vec::new();
    let conditions = check_conditions(
        psi,
        &ConditionConfig {
            tol: quad.tolerance(),
            ..ConditionConfig::default()
        },
    );
    for (name, c) in [("A1", &conditions.a1), ("A2", &conditions.a2), ("A3", &conditions.a3)] {
        match c.verdict {
            Verdict::Fails => {
                return Err(Error::NoBound(format!(
                    "hypothesis fails: condition {name} does not hold ({})",
                    c.diagnostic
                )))
            }
            Verdict::Inconclusive => diagnostics.push(format!("condition {name} inconclusive: {}", c.diagnostic)),
            Verdict::Holds => {}
        }
    }
    let mu_total = match sp.mu_total() {
        Ok(m) => m,
        Err(Error::InfiniteMass(msg)) => {
            return Err(Error::NoBound(format!("hypothesis fails: μ(ℝ) = ∞ ({msg})")))
        }
        Err(e) => return Err(e),
    };
    if !psi.is_monotone() {
        diagnostics.push(format!(
            "ψ is not monotone; comparability constant inf ψ/ψ* = {:.6}",
            psi.comparability_constant()?
        ));
    }

    let ev = HarmonicEvaluator::with_options(psi.clone(), *quad, true)?;
    let tol = cfg.tolerance();
    let d = compute_delta(&ev, sp, &cfg.scan)?;
    let lambda1 = match d.delta.finite() {
        Some(v) => Some(lambda1_lower(v)?),
        None => {
            diagnostics.push(format!(
                "δ possibly infinite (objective still rising at x = {:e}); no λ₁ bound",
                d.delta.at
            ));
            None
        }
    };
    let (lambda0_lower, lambda0_upper) = lambda0_bracket(&d);
    let iv = match compute_i_and_kappa(&ev, sp, &tol) {
        Ok(v) => Some(v),
        Err(Error::NoBound(msg)) => {
            diagnostics.push(msg);
            None
        }
        Err(e) => return Err(e),
    };

    let wlsc = if cfg.wlsc {
        match fit_wlsc(psi, &WlscGrids::default()) {
            Ok(w) => Some(wlsc_bounds(psi, &w, sp, &cfg.scan, &tol)?),
            Err(Error::NotWlsc) => {
                diagnostics.push("ψ is not weakly lower scaling with exponent > 1; scaling bounds skipped".into());
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let family = family_bounds(psi, sp, &cfg.scan, &tol)?;

    let sqrt_h = match (d.delta.finite(), cfg.certificate_points) {
        (Some(delta), n) if n > 0 => {
            let grid = if n == 1 {
                vec![cfg.certificate_lo]
            } else {
                log_grid(cfg.certificate_lo, cfg.certificate_hi, n)
            };
            Some(sqrt_h_check(&ev, sp, delta, &grid, &tol)?)
        }
        _ => None,
    };
    let curve = objective_curve(&ev, sp, &cfg.scan)?;

    Ok(ErgodicityReport {
        symbol: psi.describe(),
        speed: sp.to_string(),
        mu_total,
        conditions,
        delta: d.delta,
        delta_plus: d.delta_plus,
        delta_minus: d.delta_minus,
        lambda1_lower: lambda1,
        i_value: iv.map(|v| v.i_value),
        kappa_lower: iv.map(|v| v.kappa_lower),
        m0_upper: iv.map(|v| v.m0_upper),
        lambda0_lower,
        lambda0_upper,
        wlsc,
        family_bounds: family,
        sqrt_h_check: sqrt_h,
        diagnostics,
        provenance: Provenance {
            config_hash: String::new(),
            quad: *quad,
            bounds: cfg.clone(),
        },
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speed::TabulatedSpeed;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn brownian_exp() -> (HarmonicEvaluator, SpeedFunction) {
        (
            HarmonicEvaluator::new(CharacteristicExponent::brownian(1.0).unwrap()),
            SpeedFunction::exp_growth(1.0).unwrap(),
        )
    }

    fn tol() -> Tolerance {
        Tolerance::new(1e-11, 1e-9)
    }

    #[test]
    fn delta_for_brownian_exp() {
        let (ev, sp) = brownian_exp();
        let d = compute_delta(&ev, &sp, &ScanConfig::default()).unwrap();
        assert!((d.delta.value - 1.0 / E).abs() < 1e-9);
        assert!((d.delta.at - 1.0).abs() < 1e-4);
        assert!(!d.delta.possibly_infinite);
        // Dense brute force of x e^{-x}.
        let brute = (1..200_000).map(|i| i as f64 * 1e-4).map(|x| x * (-x).exp()).fold(0.0, f64::max);
        assert!((d.delta.value - brute).abs() < 1e-8);
        assert_eq!(d.delta_plus, d.delta_minus);
        assert!((d.delta_plus.value - 0.5 / E).abs() < 1e-9);
        assert_relative_eq!(lambda1_lower(d.delta.value).unwrap(), E / 8.0, max_relative = 1e-8);
        let (lo, hi) = lambda0_bracket(&d);
        assert_relative_eq!(lo.unwrap(), E / 8.0, max_relative = 1e-8);
        assert_relative_eq!(hi.unwrap(), 4.0 * E, max_relative = 1e-8);
        assert!(lambda1_lower(f64::INFINITY).is_err());
    }

    #[test]
    fn delta_for_stable_with_power_tail() {
        let a = 1.5;
        let om = omega_alpha(a).unwrap();
        let ev = HarmonicEvaluator::new(CharacteristicExponent::stable(a).unwrap());
        let tail = |x: f64| Ok(if x >= 1.0 { x.powf(1.0 - a) } else { 1.0 });
        let d = sup_product(|x| ev.h(x), tail, &ScanConfig::default()).unwrap();
        assert_relative_eq!(d.value, om / 2.0, max_relative = 1e-10);
        assert!(!d.possibly_infinite);
    }

    #[test]
    fn compact_support_sup_is_inside() {
        let (ev, _) = brownian_exp();
        let r = 3.0;
        let tail = |x: f64| Ok(if x < r { r - x } else { 0.0 });
        let d = sup_product(|x| ev.h(x), tail, &ScanConfig::default()).unwrap();
        assert!(d.at > 0.0 && d.at <= r);
        assert_relative_eq!(d.value, 9.0 / 8.0, max_relative = 1e-9);
    }

    #[test]
    fn rising_objective_is_flagged() {
        // Brownian with a tail decaying like x^{-1/2}: H·tail grows without bound.
        let ev = HarmonicEvaluator::new(CharacteristicExponent::brownian(1.0).unwrap());
        let sp = SpeedFunction::poly_growth(1.5, 1.0).unwrap();
        let d = compute_delta(&ev, &sp, &ScanConfig::default()).unwrap();
        assert!(d.delta.possibly_infinite);
        assert!(d.delta.finite().is_none());
        assert_eq!(lambda0_bracket(&d), (None, None));
    }

    #[test]
    fn i_for_brownian_exp() {
        let (ev, sp) = brownian_exp();
        let iv = compute_i_and_kappa(&ev, &sp, &tol()).unwrap();
        assert!((iv.i_value.value - 1.0).abs() < 1e-8);
        assert!((iv.kappa_lower - 0.5).abs() < 1e-8);
        assert!((iv.m0_upper - 2.0).abs() < 1e-8);
    }

    #[test]
    fn i_diverges_for_heavy_tails() {
        let ev = HarmonicEvaluator::new(CharacteristicExponent::brownian(1.0).unwrap());
        let sp = SpeedFunction::poly_growth(1.8, 1.0).unwrap();
        assert!(matches!(compute_i_and_kappa(&ev, &sp, &tol()), Err(Error::NoBound(_))));
    }

    #[test]
    fn i_is_monotone_in_speed() {
        let ev = HarmonicEvaluator::new(CharacteristicExponent::stable(1.5).unwrap());
        let mut prev = f64::INFINITY;
        for b in [0.5, 1.0, 2.0, 4.0] {
            let sp = SpeedFunction::exp_growth(b).unwrap();
            let i = compute_i_and_kappa(&ev, &sp, &tol()).unwrap().i_value.value;
            assert!(i <= prev, "b={b}");
            prev = i;
        }
    }

    #[test]
    fn family_paths_agree_with_general_ones_for_stable() {
        let a = 1.5;
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let ev = HarmonicEvaluator::new(CharacteristicExponent::stable(a).unwrap());
        let d = compute_delta(&ev, &sp, &ScanConfig::default()).unwrap();
        let iv = compute_i_and_kappa(&ev, &sp, &tol()).unwrap();
        let fb = stable_family_bounds(a, &sp, &ScanConfig::default(), &tol()).unwrap();
        assert_relative_eq!(fb.lambda1_lower.unwrap(), 1.0 / (8.0 * d.delta.value), max_relative = 1e-8);
        assert_relative_eq!(fb.kappa_lower.unwrap(), iv.kappa_lower, max_relative = 1e-7);
    }

    #[test]
    fn green_x0_identities_for_brownian() {
        let (ev, _) = brownian_exp();
        for (x, y) in [(1.0, 2.0), (3.0, 0.5), (-1.0, -4.0), (2.0, -1.0), (-0.3, 0.7)] {
            let g = green_x0(&ev, x, y).unwrap();
            let expect = if x * y > 0.0 { f64::min(x.abs(), y.abs()) } else { 0.0 };
            assert!((g - expect).abs() < 1e-12, "({x},{y}): {g}");
        }
        assert!((green_x0(&ev, 1.7, 1.7).unwrap() - 2.0 * ev.h(1.7).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn green_x0_invariants_on_builtin_families() {
        let pts = [-5.0, -1.3, -0.2, 0.4, 1.0, 2.5, 7.0];
        for psi in [
            CharacteristicExponent::stable(1.3).unwrap(),
            CharacteristicExponent::stable_mixture(1.0, 1.0, 1.5).unwrap(),
            CharacteristicExponent::cauchy_plus_brownian(),
        ] {
            let ev = HarmonicEvaluator::new(psi.clone());
            for &x in &pts {
                for &y in &pts {
                    let g = green_x0(&ev, x, y).unwrap();
                    assert!((g - green_x0(&ev, y, x).unwrap()).abs() <= 1e-12);
                    let (hx, hy) = (ev.h(x).unwrap(), ev.h(y).unwrap());
                    assert!(g <= 2.0 * hx.min(hy) + 1e-9, "{psi} ({x},{y})");
                    if x * y > 0.0 {
                        let m = ev.h(x.abs().min(y.abs())).unwrap();
                        assert!(g >= m - 1e-7, "{psi} ({x},{y}): {g} < {m}");
                    }
                }
            }
        }
    }

    #[test]
    fn green_y0_examples() {
        let (ev, sp) = brownian_exp();
        let g = green_y0_apply(&ev, &sp, |_| Ok(1.0), 1.0, &tol()).unwrap();
        assert!((g.value - (1.0 - (-1f64).exp())).abs() < 1e-8, "{g:?}");
        assert!(g.value <= 2.0);
        let z = green_y0_apply(&ev, &sp, |_| Ok(0.0), 1.0, &tol()).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn certificate_properties() {
        let (ev, sp) = brownian_exp();
        let grid = log_grid(0.05, 20.0, 12);
        let c = variational_lower_certificate(&ev, &sp, |x| ev.h(x), &grid, &tol()).unwrap();
        assert!(c.value > 0.0 && c.value <= 4.0 * E);
        let c3 = variational_lower_certificate(&ev, &sp, |x| Ok(3.0 * ev.h(x)?), &grid, &tol()).unwrap();
        assert_relative_eq!(c.value, c3.value, max_relative = 1e-8);
        // Brute-force oracle: G_Y H at the arg-min from a direct Riemann sum.
        let x = c.at;
        let n = 400_000;
        let (lo, hi) = (-40.0, 40.0);
        let dy = (hi - lo) / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let y = lo + (i as f64 + 0.5) * dy;
            s += green_x0(&ev, x, y).unwrap() * ev.h(y).unwrap() * (-y.abs()).exp() * dy;
        }
        assert_relative_eq!(c.value, ev.h(x).unwrap() / s, max_relative = 1e-5);
        let bad = variational_lower_certificate(&ev, &sp, |_| Ok(0.0), &grid, &tol());
        assert!(bad.is_err());

        let d = compute_delta(&ev, &sp, &ScanConfig::default()).unwrap();
        let chk = sqrt_h_check(&ev, &sp, d.delta.value, &grid, &tol()).unwrap();
        assert!(chk.max_ratio <= 1.0 + 1e-6);
        assert!(chk.certificate.value >= 1.0 / (8.0 * d.delta.value) * (1.0 - 1e-6));
        assert!(chk.certificate.value <= 4.0 * E);
    }

    #[test]
    fn wlsc_bounds_match_mixture_closed_form() {
        let (c1, c2, a) = (1.0, 1.0, 1.5);
        let psi = CharacteristicExponent::stable_mixture(c1, c2, a).unwrap();
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let w = fit_wlsc(&psi, &WlscGrids::default()).unwrap();
        let wb = wlsc_bounds(&psi, &w, &sp, &ScanConfig::default(), &tol()).unwrap();
        let fb = mixture_family_bounds(c1, c2, a, &sp, &ScanConfig::default(), &tol()).unwrap();
        assert_relative_eq!(wb.lambda1_lower_wlsc.unwrap(), fb.lambda1_lower.unwrap(), max_relative = 1e-9);
        assert_relative_eq!(wb.kappa_lower_wlsc.unwrap(), fb.kappa_lower.unwrap(), max_relative = 1e-7);
        // Dense brute force of the infimum.
        let brute = (1..100_000)
            .map(|i| i as f64 * 1e-4)
            .map(|x| (c1 / x + c2 * x.powf(1.0 - a)) / (2.0 * (-x).exp()))
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(fb.sup_or_inf, brute, max_relative = 1e-6);
        assert!(wlsc_bounds(&psi, &WlscParams::new(1.0, 1.0).unwrap(), &sp, &ScanConfig::default(), &tol()).is_err());
    }

    #[test]
    fn cauchy_brownian_family_bounds_are_finite() {
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let fb = cauchy_brownian_family_bounds(&sp, &ScanConfig::default(), &tol()).unwrap();
        let brute = (1..200_000)
            .map(|i| i as f64 * 1e-4)
            .map(|x| x.ln_1p() * 2.0 * (-x).exp())
            .fold(0.0, f64::max);
        assert_relative_eq!(fb.sup_or_inf, brute, max_relative = 1e-7);
        assert_relative_eq!(fb.lambda1_lower.unwrap(), PI / (80.0 * brute), max_relative = 1e-7);
        assert!(fb.kappa_lower.unwrap() > 0.0);
    }

    #[test]
    fn asymmetric_speed_has_distinct_one_sided_deltas() {
        let ev = HarmonicEvaluator::new(CharacteristicExponent::brownian(1.0).unwrap());
        let t = TabulatedSpeed::new(vec![-2.0, -1.0, 0.0, 1.0, 2.0], vec![8.0, 3.0, 1.0, 2.0, 4.0], Some(3.0)).unwrap();
        let sp = SpeedFunction::tabulated(t);
        let d = compute_delta(&ev, &sp, &ScanConfig::default()).unwrap();
        assert!((d.delta_plus.value - d.delta_minus.value).abs() > 1e-3);
        let (lo, hi) = lambda0_bracket(&d);
        assert!(lo.unwrap() <= hi.unwrap());
    }

    #[test]
    fn analyze_brownian_exp() {
        let psi = CharacteristicExponent::brownian(1.0).unwrap();
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let cfg = BoundsConfig {
            certificate_points: 6,
            ..BoundsConfig::default()
        };
        let r = analyze(&psi, &sp, &QuadConfig::default(), &cfg).unwrap();
        assert!((r.delta.value - 1.0 / E).abs() < 1e-6);
        assert_eq!(r.lambda1_lower, r.lambda0_lower);
        assert!(r.lambda0_lower.unwrap() <= r.lambda0_upper.unwrap());
        assert!((r.kappa_lower.unwrap() - 0.5).abs() < 1e-6);
        assert!(r.has_bound());
        let chk = r.sqrt_h_check.unwrap();
        assert!(chk.certificate.value <= r.lambda0_upper.unwrap());
        assert_eq!(r.curve.len(), cfg.scan.points);
    }

    #[test]
    fn analyze_rejects_infinite_mass() {
        let psi = CharacteristicExponent::brownian(1.0).unwrap();
        let sp = SpeedFunction::constant(1.0).unwrap();
        match analyze(&psi, &sp, &QuadConfig::default(), &BoundsConfig::default()) {
            Err(Error::NoBound(msg)) => assert!(msg.contains("hypothesis fails")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn analyze_rejects_failed_conditions() {
        let psi = CharacteristicExponent::stable(0.5).unwrap();
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        assert!(matches!(
            analyze(&psi, &sp, &QuadConfig::default(), &BoundsConfig::default()),
            Err(Error::NoBound(_))
        ));
    }
}
