//! Global extremum of a one-dimensional objective on `(0, ∞)`: log-spaced grid
//! scan followed by golden-section refinement around the best grid point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` points log-spaced on `[lo, hi]` (both included).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "log_grid needs 0 < lo < hi and n >= 2");
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub refine_evals: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            lo: 1e-3,
            hi: 1e3,
            points: 200,
            refine_evals: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub at: f64,
    /// The objective was still moving toward a larger (for a sup) or smaller
    /// (for an inf) value at an end of the grid.
    pub unbounded_at_edge: bool,
}

const EDGE_RTOL: f64 = 1e-6;

/// Supremum of `f` over `x > 0`.
pub fn scan_sup<F>(f: F, cfg: &ScanConfig) -> Result<Extremum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(cfg.lo > 0.0 && cfg.hi > cfg.lo && cfg.points >= 3) {
        return Err(Error::invalid(format!("bad scan grid {cfg:?}")));
    }
    let xs = log_grid(cfg.lo, cfg.hi, cfg.points);
    let ys: Vec<f64> = xs.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    if let Some(bad) = ys.iter().position(|y| y.is_nan()) {
        return Err(Error::domain(format!("objective is NaN at x = {}", xs[bad])));
    }
    let (best, &ybest) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .unwrap();
    let n = xs.len();
    let rising_hi = best == n - 1 && ys[n - 1] > ys[n - 2] * (1.0 + EDGE_RTOL) && ys[n - 1] > 0.0;
    let rising_lo = best == 0 && ys[0] > ys[1] * (1.0 + EDGE_RTOL) && ys[0] > 0.0;
    if !ybest.is_finite() {
        return Ok(Extremum {
            value: ybest,
            at: xs[best],
            unbounded_at_edge: true,
        });
    }

    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(n - 1)];
    let (xr, yr) = golden_max(&f, lo.ln(), hi.ln(), cfg.refine_evals)?;
    let (value, at) = if yr > ybest { (yr, xr) } else { (ybest, xs[best]) };
    Ok(Extremum {
        value,
        at,
        unbounded_at_edge: rising_hi || rising_lo,
    })
}

/// Infimum of `f` over `x > 0`.
pub fn scan_inf<F>(f: F, cfg: &ScanConfig) -> Result<Extremum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let neg = scan_sup(|x| f(x).map(|y| -y), cfg)?;
    Ok(Extremum {
        value: -neg.value,
        ..neg
    })
}

/// Golden-section maximization of `f(e^u)` for `u ∈ [ulo, uhi]`.
/// Returns `(x, f(x))` of the best point seen.
fn golden_max<F>(f: &F, mut a: f64, mut b: f64, max_evals: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1.exp())?;
    let mut f2 = f(x2.exp())?;
    let mut evals = 2;
    while evals < max_evals && (b - a) > 1e-12 * (1.0 + a.abs().max(b.abs())) {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1.exp())?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2.exp())?;
        }
        evals += 1;
    }
    Ok(if f1 >= f2 { (x1.exp(), f1) } else { (x2.exp(), f2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = log_grid(1e-3, 1e3, 7);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[6], 1e3);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_of_x_exp_minus_x() {
        let ext = scan_sup(|x| Ok(x * (-x).exp()), &ScanConfig::default()).unwrap();
        assert!((ext.value - (-1f64).exp()).abs() < 1e-12);
        assert!((ext.at - 1.0).abs() < 1e-4);
        assert!(!ext.unbounded_at_edge);
    }

    #[test]
    fn rising_objective_is_flagged() {
        let ext = scan_sup(|x| Ok(x.sqrt()), &ScanConfig::default()).unwrap();
        assert!(ext.unbounded_at_edge);
    }

    #[test]
    fn flat_objective_is_not_flagged() {
        let ext = scan_sup(|x| Ok(if x < 1.0 { x } else { 1.0 }), &ScanConfig::default()).unwrap();
        assert!(!ext.unbounded_at_edge);
        assert_eq!(ext.value, 1.0);
    }

    #[test]
    fn compact_support_sup_is_inside() {
        let r = 2.0;
        let ext = scan_sup(|x| Ok(if x < r { x * (r - x) } else { 0.0 }), &ScanConfig::default()).unwrap();
        assert!(ext.at > 0.0 && ext.at <= r);
        assert!((ext.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inf_of_shifted_parabola_in_log() {
        let ext = scan_inf(|x| Ok((x.ln() - 0.5).powi(2) + 3.0), &ScanConfig::default()).unwrap();
        assert!((ext.value - 3.0).abs() < 1e-12);
        assert!((ext.at - 0.5f64.exp()).abs() < 1e-4);
    }
}
