//! Numerical quadrature used throughout the crate.
//!
//! * [`adaptive`]: globally adaptive 21-point Gauss–Kronrod on a finite interval.
//! * [`power_tail`]: `∫_a^∞ g` for integrands that eventually decay like a power,
//!   integrated in log-space with a power-law completion of the remainder.
//! * [`half_line`]: `∫_a^{±∞} f` for integrands without a known shape, using
//!   doubling panels and geometric extrapolation of the panel sums.
//! * [`oscillatory_tail`]: `∫_a^∞ g(s)·cos(ωs)` or `sin(ωs)` by exact half-period
//!   partition at the zeros of the trigonometric factor and iterated averaging of
//!   the alternating partial sums.
//!
//! Every integrand is fallible (`FnMut(f64) -> Result<f64>`) so that errors from
//! nested evaluations (a symbol queried outside its grid, an inner integral that
//! failed) propagate instead of turning into NaN.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, abs_err: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            atol: 1e-10,
            rtol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl Tolerance {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Tolerance {
            atol,
            rtol,
            ..Default::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.atol.max(self.rtol * value.abs())
    }

    fn with_atol(&self, atol: f64) -> Self {
        Tolerance { atol, ..*self }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One application of the 21-point Kronrod rule with the embedded 10-point
/// Gauss rule used for the error estimate (QUADPACK error scaling).
pub fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !result.is_finite() {
        return Err(Error::non_convergence(
            "Gauss-Kronrod panel (non-finite integrand)",
            result,
            f64::INFINITY,
        ));
    }
    Ok(Estimate {
        value: result,
        abs_err: err,
    })
}

struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
    splittable: bool,
}

/// Globally adaptive Gauss–Kronrod quadrature on `[a, b]`.
pub fn adaptive<F>(mut f: F, a: f64, b: f64, tol: &Tolerance) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Estimate::exact(0.0));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!("adaptive quadrature needs finite limits, got [{a}, {b}]")));
    }
    let first = gk21(&mut f, a, b)?;
    let mut panels = vec![Panel {
        a,
        b,
        est: first,
        splittable: true,
    }];
    loop {
        let total: f64 = panels.iter().map(|p| p.est.value).sum();
        let err: f64 = panels.iter().map(|p| p.est.abs_err).sum();
        if err <= tol.target(total) {
            return Ok(Estimate {
                value: total,
                abs_err: err,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .max_by(|(_, p), (_, q)| p.est.abs_err.total_cmp(&q.est.abs_err))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            // Every panel is at floating-point resolution; nothing more to gain.
            return Ok(Estimate {
                value: total,
                abs_err: err,
            });
        };
        if panels.len() >= tol.max_subdivisions {
            return Err(Error::non_convergence("adaptive quadrature", total, err));
        }
        let Panel { a: pa, b: pb, .. } = panels.swap_remove(i);
        let mid = 0.5 * (pa + pb);
        let tiny = 8.0 * f64::EPSILON * pa.abs().max(pb.abs()).max(f64::MIN_POSITIVE);
        let splittable = (pb - pa).abs() > tiny;
        let left = gk21(&mut f, pa, mid)?;
        let right = gk21(&mut f, mid, pb)?;
        panels.push(Panel {
            a: pa,
            b: mid,
            est: left,
            splittable,
        });
        panels.push(Panel {
            a: mid,
            b: pb,
            est: right,
            splittable,
        });
    }
}

/// `∫_start^∞ g(s) ds` for `g` that eventually behaves like `K·s^{-p}` with `p > 1`.
///
/// The integral is taken over `s = start·e^v` on unit panels in `v`; after every
/// panel the remainder is completed by the local power law
/// `S·g(S)/(p−1)`, with `p` estimated from the log-slope of `g` at `S`.
/// Iteration stops once two consecutive completed totals agree.
pub fn power_tail<G>(mut g: G, start: f64, tol: &Tolerance) -> Result<Estimate>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(start > 0.0 && start.is_finite()) {
        return Err(Error::invalid(format!("power_tail start must be positive, got {start}")));
    }
    const MAX_S: f64 = 1e150;
    const SLOPE_STEP: f64 = 0.25;

    let panel_tol = tol.with_atol(tol.atol / 64.0);
    let mut partial = 0.0;
    let mut quad_err = 0.0;
    let mut prev_total: Option<f64> = None;
    let mut settled = 0usize;
    let mut v = 0.0_f64;
    let mut last_total = f64::NAN;
    let mut last_delta = f64::INFINITY;

    while start * v.exp() < MAX_S {
        let panel = adaptive(
            |t: f64| {
                let s = start * t.exp();
                Ok(g(s)? * s)
            },
            v,
            v + 1.0,
            &panel_tol,
        )?;
        partial += panel.value;
        quad_err += panel.abs_err;
        v += 1.0;

        let s_end = start * v.exp();
        let g0 = g(s_end)?;
        let completion = if g0 == 0.0 {
            0.0
        } else {
            let g1 = g(s_end * SLOPE_STEP.exp())?;
            let slope = if g1 > 0.0 && g0 > 0.0 {
                -(g1 / g0).ln() / SLOPE_STEP
            } else {
                f64::NAN
            };
            if slope.is_finite() && slope > 1.0 {
                s_end * g0 / (slope - 1.0)
            } else {
                f64::INFINITY
            }
        };
        let total = partial + completion;
        if let Some(prev) = prev_total {
            let delta = (total - prev).abs();
            last_delta = delta;
            if total.is_finite() && delta <= 0.05 * tol.target(total) {
                settled += 1;
                if settled >= 2 {
                    return Ok(Estimate {
                        value: total,
                        abs_err: quad_err + delta + 1e-3 * completion.abs() * f64::EPSILON.sqrt(),
                    });
                }
            } else {
                settled = 0;
            }
        }
        prev_total = Some(total);
        last_total = total;
    }
    if last_total.is_finite() && last_delta <= tol.target(last_total) {
        return Ok(Estimate {
            value: last_total,
            abs_err: quad_err + last_delta,
        });
    }
    Err(Error::non_convergence(
        "power-law tail integral (integrand not integrable at infinity?)",
        if last_total.is_finite() { last_total } else { partial },
        f64::INFINITY,
    ))
}

/// Direction of a half-line integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// `∫_start^{+∞} f` (or `∫_{−∞}^start f`) on doubling panels of widths
/// `scale, 2·scale, 4·scale, …`. Once panel sums decay geometrically the
/// remainder is extrapolated as a geometric series.
pub fn half_line<F>(
    mut f: F,
    start: f64,
    dir: Direction,
    scale: f64,
    tol: &Tolerance,
) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    const MAX_PANELS: usize = 80;
    let sign = match dir {
        Direction::Up => 1.0,
        Direction::Down => -1.0,
    };
    let panel_tol = tol.with_atol(tol.atol / 32.0);
    let mut total = 0.0;
    let mut err = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_extrap: Option<f64> = None;
    let mut settled = 0usize;
    let mut offset = 0.0;
    let mut width = scale;
    for _ in 0..MAX_PANELS {
        let (lo, hi) = (start + sign * offset, start + sign * (offset + width));
        let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        if !(a.is_finite() && b.is_finite()) {
            break;
        }
        let panel = adaptive(&mut f, a, b, &panel_tol)?;
        total += panel.value;
        err += panel.abs_err;
        offset += width;
        width *= 2.0;

        let c = panel.value;
        let completion = match prev {
            Some(p) if p != 0.0 && c != 0.0 && (c / p) > 0.0 && (c / p) < 0.9 => {
                let r = c / p;
                c * r / (1.0 - r)
            }
            Some(p) if p == 0.0 && c == 0.0 => 0.0,
            _ => f64::INFINITY,
        };
        prev = Some(c);
        let extrap = total + completion;
        let target = tol.target(extrap);
        if completion.is_finite() && c.abs() + completion.abs() <= 0.01 * target {
            return Ok(Estimate {
                value: extrap,
                abs_err: err + completion.abs() + c.abs(),
            });
        }
        match prev_extrap {
            Some(pe) if extrap.is_finite() && (extrap - pe).abs() <= 0.1 * target => {
                settled += 1;
                if settled >= 2 {
                    return Ok(Estimate {
                        value: extrap,
                        abs_err: err + (extrap - pe).abs(),
                    });
                }
            }
            _ => settled = 0,
        }
        if extrap.is_finite() {
            prev_extrap = Some(extrap);
        }
    }
    Err(Error::non_convergence("half-line integral", total, f64::INFINITY))
}

/// `∫_{−∞}^{∞} f` with the real line cut at the given breakpoints.
pub fn whole_line<F>(mut f: F, breaks: &[f64], scale: f64, tol: &Tolerance) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|b| b.is_finite()).collect();
    if pts.is_empty() {
        pts.push(0.0);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut value = 0.0;
    let mut abs_err = 0.0;
    let left = half_line(&mut f, pts[0], Direction::Down, scale, tol)?;
    value += left.value;
    abs_err += left.abs_err;
    for w in pts.windows(2) {
        let piece = adaptive(&mut f, w[0], w[1], tol)?;
        value += piece.value;
        abs_err += piece.abs_err;
    }
    let right = half_line(&mut f, *pts.last().unwrap(), Direction::Up, scale, tol)?;
    value += right.value;
    abs_err += right.abs_err;
    Ok(Estimate { value, abs_err })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

impl Trig {
    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Cos => x.cos(),
            Trig::Sin => x.sin(),
        }
    }

    /// Smallest zero of `trig(ω s)` strictly greater than `s`, as an index `k`
    /// with zero location `(k + shift)·π/ω`.
    fn shift(self) -> f64 {
        match self {
            Trig::Cos => 0.5,
            Trig::Sin => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryConfig {
    pub max_half_periods: usize,
    pub accel_depth: usize,
}

impl Default for OscillatoryConfig {
    fn default() -> Self {
        OscillatoryConfig {
            max_half_periods: 20_000,
            accel_depth: 8,
        }
    }
}

/// User-facing quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadConfig {
    pub atol: f64,
    pub rtol: f64,
    pub max_half_periods: usize,
    pub accel_depth: usize,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        let t = Tolerance::default();
        let o = OscillatoryConfig::default();
        QuadConfig {
            atol: t.atol,
            rtol: t.rtol,
            max_half_periods: o.max_half_periods,
            accel_depth: o.accel_depth,
            max_subdivisions: t.max_subdivisions,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.atol >= 0.0 && self.rtol >= 0.0) || self.atol + self.rtol == 0.0 {
            return Err(Error::invalid("quadrature needs nonnegative tolerances, not both zero"));
        }
        if self.max_half_periods == 0 || self.accel_depth == 0 || self.max_subdivisions < 2 {
            return Err(Error::invalid("quadrature limits must be positive"));
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance {
            atol: self.atol,
            rtol: self.rtol,
            max_subdivisions: self.max_subdivisions,
        }
    }

    pub fn oscillatory(&self) -> OscillatoryConfig {
        OscillatoryConfig {
            max_half_periods: self.max_half_periods,
            accel_depth: self.accel_depth,
        }
    }
}

/// Repeated pairwise averaging of the last `depth + 1` partial sums.
pub fn iterated_average(sums: &[f64], depth: usize) -> f64 {
    let take = (depth + 1).min(sums.len());
    let mut w: Vec<f64> = sums[sums.len() - take..].to_vec();
    while w.len() > 1 {
        w = w.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    }
    w[0]
}

/// `∫_start^∞ g(s)·trig(ω s) ds` for `g` eventually monotone and vanishing.
///
/// The interval is partitioned at consecutive zeros of `trig(ω s)`; each
/// half-period is integrated adaptively and the alternating partial sums are
/// accelerated by [`iterated_average`].
pub fn oscillatory_tail<G>(
    mut g: G,
    omega: f64,
    start: f64,
    trig: Trig,
    tol: &Tolerance,
    cfg: &OscillatoryConfig,
) -> Result<Estimate>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid(format!("oscillatory_tail frequency must be positive, got {omega}")));
    }
    let depth = cfg.accel_depth.max(1);
    let period = PI / omega;
    let shift = trig.shift();
    let mut k = (start / period - shift).floor() + 1.0;
    let zero = |k: f64| (k + shift) * period;
    // Guard against a zero that rounds onto `start`.
    while zero(k) <= start {
        k += 1.0;
    }

    let mut integrand = |s: f64| -> Result<f64> { Ok(g(s)? * trig.eval(omega * s)) };

    let head = adaptive(&mut integrand, start, zero(k), tol)?;
    let mut quad_err = head.abs_err;
    let mut running = head.value;
    let mut scale = head.value.abs();
    let mut sums: Vec<f64> = Vec::with_capacity(64);
    let mut accelerated: Vec<f64> = Vec::with_capacity(64);
    let mut settled = 0usize;

    for _ in 0..cfg.max_half_periods {
        let (a, b) = (zero(k), zero(k + 1.0));
        let term_tol = Tolerance {
            atol: 0.01 * tol.target(scale).max(f64::MIN_POSITIVE),
            rtol: 0.0,
            max_subdivisions: tol.max_subdivisions,
        };
        let term = adaptive(&mut integrand, a, b, &term_tol)?;
        quad_err += term.abs_err;
        running += term.value;
        scale = scale.max(running.abs()).max(term.value.abs());
        sums.push(running);
        k += 1.0;

        if sums.len() > depth {
            let acc = iterated_average(&sums, depth);
            if let Some(&prev) = accelerated.last() {
                let delta: f64 = acc - prev;
                if delta.abs() <= 0.1 * tol.target(acc) {
                    settled += 1;
                    if settled >= 2 {
                        return Ok(Estimate {
                            value: acc,
                            abs_err: quad_err + delta.abs(),
                        });
                    }
                } else {
                    settled = 0;
                }
            }
            accelerated.push(acc);
        }
    }
    let partial = accelerated.last().copied().unwrap_or(running);
    let spread = match accelerated.len() {
        n if n >= 2 => (accelerated[n - 1] - accelerated[n - 2]).abs(),
        _ => f64::INFINITY,
    };
    Err(Error::non_convergence(
        "oscillatory half-period series",
        partial,
        spread,
    ))
}
