//! Exact-increment sampling of the base process `X` and the time change
//! `Y_t = X_{τ_t}`, `τ_t = inf{s > 0 : A_s > t}`, `A_t = ∫_0^t a(X_s)⁻¹ ds`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::speed::SpeedFunction;
use crate::symbol::{CharacteristicExponent, SymbolFamily};

use super::rng::{open01, std_normal, Domain, PathRng, INIT_STEP};

/// Law of one increment over `dt`: `N(0, 2σ²dt)` plus an independent symmetric
/// stable variable with exponent `c|ξ|^α dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increments {
    pub sigma2: f64,
    pub jump: Option<(f64, f64)>,
    /// Paths are continuous (no jump part).
    pub continuous: bool,
}

impl Increments {
    pub fn from_symbol(psi: &CharacteristicExponent) -> Result<Self> {
        let (sigma2, jump) = match *psi.family() {
            SymbolFamily::Stable { alpha } => (0.0, Some((alpha, 1.0))),
            SymbolFamily::Brownian { sigma2 } => (sigma2, None),
            SymbolFamily::StableMixture { c1, c2, alpha } => (c1, (c2 > 0.0).then_some((alpha, c2))),
            SymbolFamily::CauchyPlusBrownian => (1.0, Some((1.0, 1.0))),
            SymbolFamily::Tabulated(_) => {
                return Err(Error::Unsupported(
                    "simulation of tabulated symbols is not supported".into(),
                ))
            }
        };
        Ok(Increments {
            sigma2,
            jump,
            continuous: jump.is_none() || matches!(jump, Some((a, _)) if a == 2.0),
        })
    }

    /// One increment over `dt` from four uniform words.
    #[inline]
    pub fn draw(&self, dt: f64, w: [u64; 4]) -> f64 {
        let mut dx = 0.0;
        if self.sigma2 > 0.0 {
            dx += (2.0 * self.sigma2 * dt).sqrt() * std_normal(w[0], w[1]);
        }
        if let Some((alpha, c)) = self.jump {
            dx += (c * dt).powf(1.0 / alpha) * symmetric_stable(alpha, w[2], w[3]);
        }
        dx
    }
}

/// Chambers–Mallows–Stuck draw with characteristic function `e^{−|ξ|^α}`.
#[inline]
pub fn symmetric_stable(alpha: f64, w1: u64, w2: u64) -> f64 {
    let v = FRAC_PI_2 * (2.0 * open01(w1) - 1.0);
    let e = -open01(w2).ln();
    if alpha == 1.0 {
        return v.tan();
    }
    let s = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    s * (((1.0 - alpha) * v).cos() / e).powf((1.0 - alpha) / alpha)
}

/// Coarsening of the base step where the clock is slow.
///
/// Where `a(x) > clock_ratio·a(0)` the step becomes
/// `min(dt·a(x)/(clock_ratio·a(0)), Δ_spread(x))`, with `Δ_spread(x)` the step
/// whose increment scale is `spread·|x|`. Every such step advances the clock by
/// at most `dt/(clock_ratio·a(0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FarField {
    pub clock_ratio: f64,
    pub spread: f64,
}

impl Default for FarField {
    fn default() -> Self {
        FarField {
            clock_ratio: 100.0,
            spread: 0.1,
        }
    }
}

/// Base-step rule: fixed `dt`, optionally coarsened in the far field.
///
/// With the far field on, `|X|` is also clamped at the point where `a`
/// exceeds `10³⁰` times the far-field threshold; the clock is frozen there to
/// working precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepper {
    pub dt: f64,
    far: Option<(FarField, f64)>,
    cap: f64,
}

impl Stepper {
    pub fn fixed(dt: f64) -> Self {
        Stepper {
            dt,
            far: None,
            cap: f64::INFINITY,
        }
    }

    pub fn new(dt: f64, far: Option<FarField>, sp: &SpeedFunction) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("base step must be positive, got {dt}")));
        }
        let far = match far {
            Some(f) => {
                if !(f.clock_ratio >= 1.0 && f.spread > 0.0) {
                    return Err(Error::invalid("far_field needs clock_ratio >= 1 and spread > 0"));
                }
                Some((f, f.clock_ratio * sp.a(0.0)?))
            }
            None => None,
        };
        let mut cap = f64::INFINITY;
        if let Some((_, threshold)) = far {
            let mut x = sp.scale();
            while x < 1e300 {
                let (r, l) = (sp.a(x)?, sp.a(-x)?);
                if r.min(l) >= 1e30 * threshold {
                    cap = x;
                    break;
                }
                x *= 2.0;
            }
        }
        Ok(Stepper { dt, far, cap })
    }

    /// Largest `|X|` kept by the simulation.
    pub fn cap(&self) -> f64 {
        self.cap
    }

    #[inline]
    fn clamp(&self, x: f64) -> f64 {
        x.clamp(-self.cap, self.cap)
    }

    /// Base step at `x` given `a(x)`.
    #[inline]
    pub fn step(&self, inc: &Increments, x: f64, ax: f64) -> f64 {
        match self.far {
            Some((f, threshold)) if ax > threshold => {
                let r = f.spread * x.abs();
                let mut cap = f64::INFINITY;
                if inc.sigma2 > 0.0 {
                    cap = cap.min(r * r / (2.0 * inc.sigma2));
                }
                if let Some((alpha, c)) = inc.jump {
                    cap = cap.min(r.powf(alpha) / c);
                }
                (self.dt * ax / threshold).min(cap).max(self.dt)
            }
            _ => self.dt,
        }
    }
}

/// `X_0 = x0, X_k = X_{k−1} + ΔX_k` for `k = 1..=n_steps`.
pub fn sample_base_path(inc: &Increments, x0: f64, n_steps: usize, dt: f64, seed: u64, path_id: u64) -> Vec<f64> {
    let mut rng = PathRng::new(seed, Domain::Decay, path_id);
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut x = x0;
    out.push(x);
    for _ in 0..n_steps {
        x += inc.draw(dt, rng.next_step());
        out.push(x);
    }
    out
}

/// Result of reading `Y` at given output times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChanged {
    pub y: Vec<f64>,
    /// The base path ran out before the clock reached the last output time;
    /// missing values are NaN.
    pub truncated: bool,
}

/// Left-Riemann clock `A_k = Σ_{j<k} dt/a(X_j)` on the base grid.
pub fn clock(path: &[f64], sp: &SpeedFunction, dt: f64) -> Result<Vec<f64>> {
    let mut a = Vec::with_capacity(path.len());
    let mut acc = 0.0;
    a.push(0.0);
    for &x in &path[..path.len().saturating_sub(1)] {
        acc += dt / sp.a(x)?;
        a.push(acc);
    }
    Ok(a)
}

/// Slack when comparing clock values with output times.
#[inline]
fn clock_slack(t: f64) -> f64 {
    1e-12 * t.max(1.0)
}

/// `Y_t = X_k` with `k` the last base index whose clock value is `≤ t`.
pub fn time_change(path: &[f64], sp: &SpeedFunction, dt: f64, output_times: &[f64]) -> Result<TimeChanged> {
    let a = clock(path, sp, dt)?;
    let mut y = Vec::with_capacity(output_times.len());
    let mut truncated = false;
    let mut k = 0usize;
    for &t in output_times {
        while k + 1 < a.len() && a[k + 1] <= t + clock_slack(t) {
            k += 1;
        }
        if k + 1 == a.len() && a[k] < t - clock_slack(t) {
            truncated = true;
            y.push(f64::NAN);
        } else {
            y.push(path[k]);
        }
    }
    Ok(TimeChanged { y, truncated })
}

/// Numerical inverse CDF of `μ/μ(ℝ)` on a fixed grid.
#[derive(Debug, Clone)]
pub struct StationarySampler {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl StationarySampler {
    pub fn new(sp: &SpeedFunction, points: usize) -> Result<Self> {
        let total = sp.mu_total()?;
        let mut l = sp.scale();
        while sp.mu_tail(l)? > 1e-12 * total {
            l *= 1.5;
            if l > 1e12 {
                return Err(Error::domain("stationary law has too heavy tails to tabulate"));
            }
        }
        let n = points.max(3);
        let xs: Vec<f64> = (0..n).map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64).collect();
        let mut cdf = Vec::with_capacity(n);
        for &x in &xs {
            cdf.push((sp.mu_left(x)? / total).clamp(0.0, 1.0));
        }
        for i in 1..n {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        Ok(StationarySampler { xs, cdf })
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.xs.len();
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, n - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        if c1 > c0 {
            x0 + (x1 - x0) * ((u - c0) / (c1 - c0)).clamp(0.0, 1.0)
        } else {
            x0
        }
    }

    pub fn draw(&self, seed: u64, domain: Domain, path_id: u64) -> f64 {
        let mut rng = PathRng::new(seed, domain, path_id);
        rng.seek(INIT_STEP);
        self.quantile(open01(rng.next_step()[0]))
    }
}

/// Streaming simulation of one `Y` path read at `output_times` (ascending).
pub fn simulate_y_path(
    inc: &Increments,
    sp: &SpeedFunction,
    x0: f64,
    stepper: &Stepper,
    output_times: &[f64],
    max_base_steps: u64,
    rng: &mut PathRng,
) -> Result<TimeChanged> {
    let mut y = Vec::with_capacity(output_times.len());
    let mut x = x0;
    let mut a = 0.0;
    let mut steps = 0u64;
    for &t in output_times {
        // Advance while the next clock value A_{k+1} = A_k + Δ_k/a(X_k) is ≤ t.
        loop {
            let ax = sp.a(x)?;
            let h = stepper.step(inc, x, ax);
            let next = a + h / ax;
            if next > t + clock_slack(t) {
                break;
            }
            if steps >= max_base_steps {
                y.resize(output_times.len(), f64::NAN);
                return Ok(TimeChanged { y, truncated: true });
            }
            x = stepper.clamp(x + inc.draw(h, rng.next_step()));
            a = next;
            steps += 1;
        }
        y.push(x);
    }
    Ok(TimeChanged { y, truncated: false })
}

/// Whether a continuous path from `x` to `nx` over base time `h` met
/// `[−eps, eps]` in between: certain on a sign change, otherwise with the
/// Brownian-bridge crossing probability `exp(−2(|x|−eps)(|nx|−eps)/(2σ²h))`.
#[inline]
fn bridge_enters(inc: &Increments, x: f64, nx: f64, eps: f64, h: f64, w: u64) -> bool {
    if nx.signum() != x.signum() {
        return true;
    }
    let v = 2.0 * inc.sigma2 * h;
    v > 0.0 && open01(w) < (-2.0 * (x.abs() - eps) * (nx.abs() - eps) / v).exp()
}

/// Outcome of a first-entry search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Clock time of the entry, or the horizon if censored.
    pub time: f64,
    pub censored: bool,
}

/// First `Y`-time at which the path enters `[−eps, eps]`, credited at the end
/// of the base step. Continuous paths also test the bridge between steps.
#[allow(clippy::too_many_arguments)]
pub fn first_entry(
    inc: &Increments,
    sp: &SpeedFunction,
    x0: f64,
    eps: f64,
    stepper: &Stepper,
    horizon: f64,
    max_base_steps: u64,
    rng: &mut PathRng,
) -> Result<Hit> {
    if x0.abs() <= eps {
        return Ok(Hit {
            time: 0.0,
            censored: false,
        });
    }
    let mut x = x0;
    let mut a = 0.0;
    for _ in 0..max_base_steps {
        let ax = sp.a(x)?;
        let h = stepper.step(inc, x, ax);
        let next = a + h / ax;
        let w = rng.next_step();
        let nx = stepper.clamp(x + inc.draw(h, w));
        if next > horizon + clock_slack(horizon) {
            break;
        }
        a = next;
        if nx.abs() <= eps || (inc.continuous && bridge_enters(inc, x, nx, eps, h, w[2])) {
            return Ok(Hit {
                time: a,
                censored: false,
            });
        }
        x = nx;
    }
    Ok(Hit {
        time: horizon,
        censored: true,
    })
}
