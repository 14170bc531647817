//! Monte Carlo verification: ensembles of time-changed paths, fitted decay
//! rates of `E f(Y_t) − μ(f)`, first-entry times, and the empirical
//! characteristic function of the base process.

pub mod process;
pub mod rng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Tolerance;
use crate::speed::SpeedFunction;
use crate::symbol::{ols_slope, CharacteristicExponent};

use process::{first_entry, sample_base_path, simulate_y_path, FarField, Increments, StationarySampler, Stepper};
use rng::{open01, Domain, PathRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `sign(x)·min(|x|, cap)`
    Clipped { cap: f64 },
    /// `sign(x)`
    Sign,
    /// `1{x > 0}`
    PositiveIndicator,
    Constant { value: f64 },
}

impl Default for Observable {
    fn default() -> Self {
        Observable::Clipped { cap: 1.0 }
    }
}

impl Observable {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Observable::Clipped { cap } => x.signum() * x.abs().min(cap),
            Observable::Sign => {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum()
                }
            }
            Observable::PositiveIndicator => f64::from(x > 0.0),
            Observable::Constant { value } => value,
        }
    }

    /// `μ(f)/μ(ℝ)`.
    pub fn stationary_mean(&self, sp: &SpeedFunction) -> Result<f64> {
        let total = sp.mu_total()?;
        let breaks: Vec<f64> = match *self {
            Observable::Clipped { cap } => vec![-cap, cap],
            _ => vec![],
        };
        let tol = Tolerance::new(1e-12, 1e-10);
        Ok(sp.mu_integral(|y| Ok(self.eval(y)), &breaks, &tol)?.value / total)
    }

    pub fn describe(&self) -> String {
        match self {
            Observable::Clipped { cap } => format!("sign(x)*min(|x|,{cap})"),
            Observable::Sign => "sign(x)".into(),
            Observable::PositiveIndicator => "1{x>0}".into(),
            Observable::Constant { value } => format!("constant({value})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLaw {
    /// Point mass at `x0`.
    Point(f64),
    /// `μ/μ(ℝ)`.
    Stationary,
}

impl Default for InitialLaw {
    fn default() -> Self {
        InitialLaw::Point(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Window starts where `m(t) < start_fraction·m(0)`.
    pub start_fraction: f64,
    /// Window ends where `m(t) < noise_multiple·se(t)`.
    pub noise_multiple: f64,
    pub min_points: usize,
    pub bootstrap: usize,
    /// Two-sided confidence level of the bootstrap interval.
    pub confidence: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            start_fraction: 0.5,
            noise_multiple: 5.0,
            min_points: 3,
            bootstrap: 200,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReturnTimeConfig {
    pub eps: f64,
    pub x0: f64,
    pub n_paths: usize,
    /// Censoring horizon in `Y`-time (defaults to the ensemble horizon).
    pub horizon: Option<f64>,
}

impl Default for ReturnTimeConfig {
    fn default() -> Self {
        ReturnTimeConfig {
            eps: 0.05,
            x0: 1.0,
            n_paths: 10_000,
            horizon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Base-time step; `1e-3·T` when absent.
    pub dt: Option<f64>,
    pub seed: u64,
    pub observable: Observable,
    pub init: InitialLaw,
    /// Spacing of the output times `0, h, 2h, …, T`.
    pub output_step: f64,
    pub max_base_steps: u64,
    pub fit: FitConfig,
    pub return_time: Option<ReturnTimeConfig>,
    /// Write `paths.csv` with every path's `(t, Y_t)`.
    pub per_path_csv: bool,
    /// Far-field step coarsening; `null` keeps the fixed step everywhere.
    pub far_field: Option<FarField>,
    /// Limit of `E f(Y_t)`; required when `μ(ℝ) = ∞`, defaults to `μ(f)/μ(ℝ)`.
    pub target: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_paths: 10_000,
            horizon: 20.0,
            dt: None,
            seed: 0,
            observable: Observable::default(),
            init: InitialLaw::default(),
            output_step: 0.05,
            max_base_steps: 50_000_000,
            fit: FitConfig::default(),
            return_time: None,
            per_path_csv: false,
            far_field: Some(FarField::default()),
            target: None,
        }
    }
}

impl SimConfig {
    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(1e-3 * self.horizon)
    }

    pub fn output_times(&self) -> Vec<f64> {
        let n = (self.horizon / self.output_step + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * self.output_step).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::Config("sim.n_paths must be at least 2".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config("sim.T must be positive".into()));
        }
        if !(self.dt() > 0.0 && self.dt() <= self.horizon) {
            return Err(Error::Config("sim.dt must lie in (0, T]".into()));
        }
        if !(self.output_step > 0.0 && self.output_step <= self.horizon) {
            return Err(Error::Config("sim.output_step must lie in (0, T]".into()));
        }
        if !(self.fit.start_fraction > 0.0 && self.fit.start_fraction <= 1.0) {
            return Err(Error::Config("sim.fit.start_fraction must lie in (0, 1]".into()));
        }
        if !(self.fit.confidence > 0.0 && self.fit.confidence < 1.0) {
            return Err(Error::Config("sim.fit.confidence must lie in (0, 1)".into()));
        }
        if let Some(rt) = &self.return_time {
            if !(rt.eps > 0.0) || rt.n_paths == 0 {
                return Err(Error::Config("sim.return_time needs eps > 0 and n_paths > 0".into()));
            }
        }
        Ok(())
    }
}

/// Seeded sample of `Y` paths read at common output times.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub seed: u64,
    pub n_paths: usize,
    pub horizon: f64,
    pub dt: f64,
    pub initial_law: InitialLaw,
    pub times: Vec<f64>,
    /// `paths[i][k] = Y_{t_k}` of path `i` (NaN past a truncation).
    pub paths: Vec<Vec<f64>>,
    pub truncated: usize,
    pub symbol: String,
    pub speed: String,
}

/// Simulates `cfg.n_paths` paths in parallel; results do not depend on the
/// number of worker threads.
pub fn simulate_ensemble(psi: &CharacteristicExponent, sp: &SpeedFunction, cfg: &SimConfig) -> Result<PathEnsemble> {
    cfg.validate()?;
    let inc = Increments::from_symbol(psi)?;
    let times = cfg.output_times();
    let dt = cfg.dt();
    let stepper = Stepper::new(dt, cfg.far_field, sp)?;
    let sampler = match cfg.init {
        InitialLaw::Stationary => Some(StationarySampler::new(sp, 10_000)?),
        InitialLaw::Point(_) => None,
    };
    let results: Vec<process::TimeChanged> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|id| {
            let x0 = match (&sampler, cfg.init) {
                (Some(s), _) => s.draw(cfg.seed, Domain::Decay, id),
                (None, InitialLaw::Point(x)) => x,
                (None, InitialLaw::Stationary) => unreachable!("sampler exists for stationary init"),
            };
            let mut rng = PathRng::new(cfg.seed, Domain::Decay, id);
            simulate_y_path(&inc, sp, x0, &stepper, &times, cfg.max_base_steps, &mut rng)
        })
        .collect::<Result<_>>()?;
    let truncated = results.iter().filter(|r| r.truncated).count();
    Ok(PathEnsemble {
        seed: cfg.seed,
        n_paths: cfg.n_paths,
        horizon: cfg.horizon,
        dt,
        initial_law: cfg.init,
        times,
        paths: results.into_iter().map(|r| r.y).collect(),
        truncated,
        symbol: psi.describe(),
        speed: sp.to_string(),
    })
}

/// Mean and standard error of `f(Y_t)` at every output time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurve {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub count: Vec<usize>,
}

pub fn mean_curve(ens: &PathEnsemble, f: &Observable) -> MeanCurve {
    mean_curve_of(ens, f, None)
}

fn mean_curve_of(ens: &PathEnsemble, f: &Observable, pick: Option<&[usize]>) -> MeanCurve {
    let nt = ens.times.len();
    let mut sum = vec![0.0; nt];
    let mut sum2 = vec![0.0; nt];
    let mut count = vec![0usize; nt];
    let mut add = |path: &Vec<f64>| {
        for (k, &y) in path.iter().enumerate() {
            if y.is_nan() {
                continue;
            }
            let v = f.eval(y);
            sum[k] += v;
            sum2[k] += v * v;
            count[k] += 1;
        }
    };
    match pick {
        Some(idx) => idx.iter().for_each(|&i| add(&ens.paths[i])),
        None => ens.paths.iter().for_each(&mut add),
    }
    let mut mean = vec![f64::NAN; nt];
    let mut se = vec![f64::NAN; nt];
    for k in 0..nt {
        let n = count[k] as f64;
        if count[k] >= 2 {
            mean[k] = sum[k] / n;
            let var = ((sum2[k] - n * mean[k] * mean[k]) / (n - 1.0)).max(0.0);
            se[k] = (var / n).sqrt();
        }
    }
    MeanCurve {
        times: ens.times.clone(),
        mean,
        se,
        count,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub observable: String,
    pub target: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// Root-mean-square residual of the log-linear fit.
    pub residual_norm: f64,
}

/// Fits `log m(t)`, `m(t) = |mean f(Y_t) − target|`, by least squares on the
/// window from `m < start_fraction·m(0)` to `m < noise_multiple·se`.
///
/// `target` defaults to `μ(f)/μ(ℝ)`; it must be given when `μ(ℝ) = ∞`.
pub fn estimate_decay_rate(
    ens: &PathEnsemble,
    f: &Observable,
    sp: &SpeedFunction,
    target: Option<f64>,
    fit: &FitConfig,
) -> Result<DecayEstimate> {
    let target = match target {
        Some(t) => t,
        None => f.stationary_mean(sp)?,
    };
    let curve = mean_curve(ens, f);
    let m: Vec<f64> = curve.mean.iter().map(|v| (v - target).abs()).collect();
    let (lo, hi) = fit_window(&m, &curve.se, fit)?;
    let (rate, residual_norm) = log_linear_rate(&curve.times[lo..hi], &m[lo..hi]);
    if !rate.is_finite() {
        return Err(Error::NoSignal("decay fit produced a non-finite rate".into()));
    }

    let mut boot = Vec::with_capacity(fit.bootstrap);
    let n = ens.paths.len();
    let mut idx = vec![0usize; n];
    for b in 0..fit.bootstrap {
        let mut rng = PathRng::new(ens.seed, Domain::Bootstrap, b as u64);
        let mut words = rng.next_step().into_iter();
        for slot in idx.iter_mut() {
            let w = match words.next() {
                Some(w) => w,
                None => {
                    words = rng.next_step().into_iter();
                    words.next().expect("a step has words")
                }
            };
            *slot = ((open01(w) * n as f64) as usize).min(n - 1);
        }
        let c = mean_curve_of(ens, f, Some(&idx));
        let mb: Vec<f64> = c.mean[lo..hi].iter().map(|v| (v - target).abs()).collect();
        if mb.iter().all(|&v| v > 0.0 && v.is_finite()) {
            let (r, _) = log_linear_rate(&curve.times[lo..hi], &mb);
            if r.is_finite() {
                boot.push(r);
            }
        }
    }
    let (ci_low, ci_high) = if boot.len() >= 2 {
        boot.sort_by(f64::total_cmp);
        let q = |p: f64| boot[((p * (boot.len() - 1) as f64).round() as usize).min(boot.len() - 1)];
        let alpha = 1.0 - fit.confidence;
        (q(alpha / 2.0).min(rate), q(1.0 - alpha / 2.0).max(rate))
    } else {
        (rate, rate)
    };
    Ok(DecayEstimate {
        rate,
        ci_low,
        ci_high,
        confidence: fit.confidence,
        observable: f.describe(),
        target,
        window: (curve.times[lo], curve.times[hi - 1]),
        points: hi - lo,
        residual_norm,
    })
}

fn fit_window(m: &[f64], se: &[f64], fit: &FitConfig) -> Result<(usize, usize)> {
    let m0 = m[0];
    if !(m0 > 0.0) || !m0.is_finite() {
        return Err(Error::NoSignal(format!(
            "centered observable is {m0:e} at t = 0; nothing decays"
        )));
    }
    let start = m
        .iter()
        .position(|&v| v < fit.start_fraction * m0)
        .ok_or_else(|| Error::NoSignal("observable never fell below the window start level".into()))?;
    let end = (start..m.len())
        .find(|&k| !(m[k] >= fit.noise_multiple * se[k]) || m[k] == 0.0)
        .unwrap_or(m.len());
    if end < start + fit.min_points.max(2) {
        return Err(Error::NoSignal(format!(
            "only {} points above the noise floor after the window start",
            end - start
        )));
    }
    Ok((start, end))
}

/// `(−slope, rms residual)` of a least-squares line through `(t, ln m)`.
fn log_linear_rate(t: &[f64], m: &[f64]) -> (f64, f64) {
    let y: Vec<f64> = m.iter().map(|v| v.ln()).collect();
    let slope = ols_slope(t, &y);
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let rss: f64 = t
        .iter()
        .zip(&y)
        .map(|(ti, yi)| {
            let r = yi - (my + slope * (ti - mt));
            r * r
        })
        .sum();
    (-slope, (rss / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeEstimate {
    pub eps: f64,
    pub x0: f64,
    pub n_paths: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Paths that did not enter by the horizon; they count at the horizon, so
    /// the mean is then a lower bound.
    pub censored: usize,
    pub horizon: f64,
}

/// Mean first-entry time of `Y` into `[−eps, eps]` from `x0` (normal 95% CI).
#[allow(clippy::too_many_arguments)]
pub fn estimate_return_time(
    psi: &CharacteristicExponent,
    sp: &SpeedFunction,
    eps: f64,
    x0: f64,
    n_paths: usize,
    stepper: &Stepper,
    horizon: f64,
    max_base_steps: u64,
    seed: u64,
) -> Result<ReturnTimeEstimate> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if n_paths == 0 {
        return Err(Error::invalid("return-time estimate needs at least one path"));
    }
    let inc = Increments::from_symbol(psi)?;
    let hits: Vec<process::Hit> = (0..n_paths as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = PathRng::new(seed, Domain::ReturnTime, id);
            first_entry(&inc, sp, x0, eps, stepper, horizon, max_base_steps, &mut rng)
        })
        .collect::<Result<_>>()?;
    let n = hits.len() as f64;
    let mean = hits.iter().map(|h| h.time).sum::<f64>() / n;
    let var = if hits.len() > 1 {
        hits.iter().map(|h| (h.time - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let half = 1.959_963_984_540_054 * (var / n).sqrt();
    Ok(ReturnTimeEstimate {
        eps,
        x0,
        n_paths,
        mean,
        ci_low: mean - half,
        ci_high: mean + half,
        censored: hits.iter().filter(|h| h.censored).count(),
        horizon,
    })
}

/// `E cos(ξ X_T)` with a bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfEstimate {
    pub xi: f64,
    pub value: f64,
    pub se: f64,
}

/// Samples `X_T` (from 0) on `n_paths` independent paths.
pub fn sample_x_at(psi: &CharacteristicExponent, t: f64, dt: f64, n_paths: usize, seed: u64) -> Result<Vec<f64>> {
    let inc = Increments::from_symbol(psi)?;
    let steps = (t / dt).round().max(1.0) as usize;
    let dt = t / steps as f64;
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|id| sample_base_path(&inc, 0.0, steps, dt, seed, id)[steps])
        .collect())
}

/// Real part of the empirical characteristic function (the law is symmetric)
/// with a bootstrap standard error over `bootstrap` resamples.
pub fn empirical_cf(samples: &[f64], xi: f64, bootstrap: usize, seed: u64) -> CfEstimate {
    let c: Vec<f64> = samples.iter().map(|x| (xi * x).cos()).collect();
    let n = c.len();
    let value = c.iter().sum::<f64>() / n as f64;
    let reps: Vec<f64> = (0..bootstrap as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = PathRng::new(seed, Domain::Bootstrap, (1 << 40) | b);
            let mut s = 0.0;
            let mut i = 0;
            while i < n {
                for w in rng.next_step() {
                    if i == n {
                        break;
                    }
                    s += c[((open01(w) * n as f64) as usize).min(n - 1)];
                    i += 1;
                }
            }
            s / n as f64
        })
        .collect();
    let se = if reps.len() > 1 {
        let m = reps.iter().sum::<f64>() / reps.len() as f64;
        (reps.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (reps.len() - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    CfEstimate { xi, value, se }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brownian_exp_cfg(n_paths: usize) -> SimConfig {
        SimConfig {
            n_paths,
            horizon: 6.0,
            dt: Some(0.01),
            seed: 42,
            ..SimConfig::default()
        }
    }

    #[test]
    fn observables() {
        let f = Observable::Clipped { cap: 1.0 };
        assert_eq!(f.eval(-3.0), -1.0);
        assert_eq!(f.eval(0.5), 0.5);
        assert_eq!(Observable::Sign.eval(0.0), 0.0);
        assert_eq!(Observable::PositiveIndicator.eval(2.0), 1.0);
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        assert!(f.stationary_mean(&sp).unwrap().abs() < 1e-12);
        assert!((Observable::PositiveIndicator.stationary_mean(&sp).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn output_times_cover_horizon() {
        let t = SimConfig::default().output_times();
        assert_eq!(t.len(), 401);
        assert!((t[400] - 20.0).abs() < 1e-9);
    }

    #[test]
    fn ensemble_is_deterministic_and_thread_independent() {
        let psi = CharacteristicExponent::stable(1.5).unwrap();
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let cfg = brownian_exp_cfg(64);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| simulate_ensemble(&psi, &sp, &cfg)).unwrap();
        let b = four.install(|| simulate_ensemble(&psi, &sp, &cfg)).unwrap();
        assert_eq!(a, b);
        let c = simulate_ensemble(&psi, &sp, &SimConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.paths, c.paths);
    }

    #[test]
    fn constant_observable_has_no_signal() {
        let psi = CharacteristicExponent::brownian(1.0).unwrap();
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let ens = simulate_ensemble(&psi, &sp, &brownian_exp_cfg(50)).unwrap();
        let err = estimate_decay_rate(&ens, &Observable::Constant { value: 3.0 }, &sp, None, &FitConfig::default());
        assert!(matches!(err, Err(Error::NoSignal(_))));
    }

    #[test]
    fn decay_rate_for_brownian_exp() {
        let psi = CharacteristicExponent::brownian(1.0).unwrap();
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let ens = simulate_ensemble(&psi, &sp, &brownian_exp_cfg(2000)).unwrap();
        let fit = FitConfig {
            bootstrap: 50,
            ..FitConfig::default()
        };
        let est = estimate_decay_rate(&ens, &Observable::Clipped { cap: 1.0 }, &sp, None, &fit).unwrap();
        assert!(est.ci_low <= est.rate && est.rate <= est.ci_high);
        assert!(est.rate >= 0.9 * std::f64::consts::E / 8.0, "{est:?}");
        assert!(est.points >= 3);
    }

    #[test]
    fn stationary_start_stays_stationary() {
        let psi = CharacteristicExponent::brownian(1.0).unwrap();
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let cfg = SimConfig {
            init: InitialLaw::Stationary,
            ..brownian_exp_cfg(4000)
        };
        let ens = simulate_ensemble(&psi, &sp, &cfg).unwrap();
        let f = Observable::PositiveIndicator;
        let target = f.stationary_mean(&sp).unwrap();
        let c = mean_curve(&ens, &f);
        let bad = c
            .mean
            .iter()
            .zip(&c.se)
            .filter(|(m, s)| (*m - target).abs() > 3.0 * **s)
            .count();
        // 3-SE band: allow the ~0.3% of times expected to fall outside.
        assert!(bad <= c.mean.len() / 50 + 1, "{bad} of {}", c.mean.len());
    }

    #[test]
    fn far_field_agrees_with_fixed_step() {
        let psi = CharacteristicExponent::brownian(1.0).unwrap();
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let base = SimConfig {
            init: InitialLaw::Point(2.5),
            horizon: 1.0,
            output_step: 0.125,
            far_field: Some(FarField {
                clock_ratio: 3.0,
                spread: 0.1,
            }),
            ..brownian_exp_cfg(2000)
        };
        let fixed = simulate_ensemble(&psi, &sp, &SimConfig { far_field: None, ..base.clone() }).unwrap();
        let far = simulate_ensemble(&psi, &sp, &base).unwrap();
        let f = Observable::Clipped { cap: 1.0 };
        let (a, b) = (mean_curve(&fixed, &f), mean_curve(&far, &f));
        for k in 1..a.times.len() {
            let se = (a.se[k].powi(2) + b.se[k].powi(2)).sqrt();
            assert!((a.mean[k] - b.mean[k]).abs() < 4.0 * se + 1e-3, "t={}: {} vs {}", a.times[k], a.mean[k], b.mean[k]);
        }
    }

    #[test]
    fn return_time_monotone_in_eps() {
        let psi = CharacteristicExponent::stable(1.5).unwrap();
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let st = Stepper::new(0.005, Some(FarField::default()), &sp).unwrap();
        let small = estimate_return_time(&psi, &sp, 0.05, 1.0, 2000, &st, 20.0, 1 << 30, 7).unwrap();
        let large = estimate_return_time(&psi, &sp, 0.3, 1.0, 2000, &st, 20.0, 1 << 30, 7).unwrap();
        assert!(large.mean <= small.mean, "{large:?} vs {small:?}");
        let zero = estimate_return_time(&psi, &sp, 0.05, 0.01, 10, &st, 20.0, 1 << 30, 7).unwrap();
        assert_eq!(zero.mean, 0.0);
    }

    #[test]
    fn cf_bootstrap_se_is_binomial_scale() {
        let psi = CharacteristicExponent::brownian(1.0).unwrap();
        let x = sample_x_at(&psi, 1.0, 0.1, 20_000, 5).unwrap();
        let cf = empirical_cf(&x, 1.0, 100, 5);
        // X_1 ~ N(0, 2): E cos X_1 = e^{-1}.
        assert!((cf.value - (-1f64).exp()).abs() < 4.0 * cf.se, "{cf:?}");
        assert!(cf.se > 0.001 && cf.se < 0.01);
    }
}
