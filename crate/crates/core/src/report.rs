//! On-disk artifacts: `report.json`, `curves.csv`, `ensemble.json`, and the
//! merged tables written by `report`.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{CurvePoint, ErgodicityReport};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::sim::{DecayEstimate, MeanCurve, ReturnTimeEstimate, SimConfig};

pub const REPORT_SCHEMA: &str = "levygap.report/1";
pub const ENSEMBLE_SCHEMA: &str = "levygap.ensemble/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub quad_atol: f64,
    pub quad_rtol: f64,
    pub integral_atol: f64,
    pub integral_rtol: f64,
    pub scan_lo: f64,
    pub scan_hi: f64,
    pub scan_points: usize,
}

impl Tolerances {
    pub fn of(cfg: &RunConfig) -> Self {
        Tolerances {
            quad_atol: cfg.quad.atol,
            quad_rtol: cfg.quad.rtol,
            integral_atol: cfg.bounds.integral_atol,
            integral_rtol: cfg.bounds.integral_rtol,
            scan_lo: cfg.bounds.scan.lo,
            scan_hi: cfg.bounds.scan.hi,
            scan_points: cfg.bounds.scan.points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub analyze_seconds: f64,
    pub total_seconds: f64,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema: String,
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub tolerances: Tolerances,
    pub report: ErgodicityReport,
    pub curve: Vec<CurvePoint>,
    pub timings: Timings,
}

impl ReportFile {
    pub fn new(cfg: &RunConfig, mut report: ErgodicityReport, timings: Timings) -> Self {
        let hash = cfg.hash();
        report.provenance.config_hash = hash.clone();
        let curve = std::mem::take(&mut report.curve);
        ReportFile {
            schema: REPORT_SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: hash,
            config: cfg.clone(),
            tolerances: Tolerances::of(cfg),
            report,
            curve,
            timings,
        }
    }

    /// Reads a report, mapping anything that is not a `levygap.report/1`
    /// document to [`Error::Schema`].
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let schema_err = |message: String| Error::Schema {
            path: path.to_path_buf(),
            message,
        };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| schema_err(e.to_string()))?;
        match value.get("schema").and_then(|s| s.as_str()) {
            Some(REPORT_SCHEMA) => {}
            Some(other) => return Err(schema_err(format!("expected schema {REPORT_SCHEMA}, found {other}"))),
            None => return Err(schema_err("missing `schema` field".into())),
        }
        serde_json::from_value(value).map_err(|e| schema_err(e.to_string()))
    }
}

/// The `{λ₁ bound, fitted rate, verdict}` record of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lambda1_lower: Option<f64>,
    pub fitted_rate: f64,
    pub rate_ci: (f64, f64),
    /// `consistent` when the rate is at least `0.9·λ₁ bound`.
    pub verdict: String,
    pub m0_upper: Option<f64>,
    pub return_time_mean: Option<f64>,
    /// `consistent` when the mean return time is at most `M₀ bound` plus
    /// the CI half-width.
    pub return_verdict: Option<String>,
}

/// Rate margin used by the comparison verdict.
pub const RATE_MARGIN: f64 = 0.9;

impl Comparison {
    pub fn new(
        lambda1_lower: Option<f64>,
        decay: &DecayEstimate,
        m0_upper: Option<f64>,
        ret: Option<&ReturnTimeEstimate>,
    ) -> Self {
        let verdict = match lambda1_lower {
            Some(l) if decay.rate >= RATE_MARGIN * l => "consistent",
            Some(_) => "inconsistent",
            None => "no_bound",
        };
        let return_verdict = match (m0_upper, ret) {
            (Some(m0), Some(r)) => Some(if r.mean <= m0 + (r.ci_high - r.mean) { "consistent" } else { "inconsistent" }),
            (None, Some(_)) => Some("no_bound"),
            _ => None,
        };
        Comparison {
            lambda1_lower,
            fitted_rate: decay.rate,
            rate_ci: (decay.ci_low, decay.ci_high),
            verdict: verdict.into(),
            m0_upper,
            return_time_mean: ret.map(|r| r.mean),
            return_verdict: return_verdict.map(String::from),
        }
    }
}

/// Contents of `ensemble.json`; free of timings so that equal seeds give equal
/// bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub schema: String,
    pub version: String,
    pub config_hash: String,
    pub symbol: String,
    pub speed: String,
    pub sim: SimConfig,
    pub truncated_paths: usize,
    pub observable: String,
    pub target: f64,
    pub mean_curve: MeanCurve,
    pub decay: DecayEstimate,
    pub return_time: Option<ReturnTimeEstimate>,
    pub comparison: Comparison,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

const CURVE_COLUMNS: [&str; 6] = ["x", "h", "mu_tail", "mu_right", "mu_left", "objective"];

fn curve_fields(p: &CurvePoint) -> [String; 6] {
    [p.x, p.h, p.mu_tail, p.mu_right, p.mu_left, p.objective].map(fmt_f64)
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_curves_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CURVE_COLUMNS)?;
    for p in curve {
        w.write_record(curve_fields(p))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_paths_csv(path: &Path, times: &[f64], paths: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["path", "t", "y"])?;
    for (i, p) in paths.iter().enumerate() {
        for (t, y) in times.iter().zip(p) {
            w.write_record([i.to_string(), fmt_f64(*t), fmt_f64(*y)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Column order of the merged `bounds.csv`.
pub const BOUNDS_COLUMNS: [&str; 25] = [
    "source",
    "config_hash",
    "symbol",
    "speed",
    "mu_total",
    "delta",
    "delta_plus",
    "delta_minus",
    "lambda1_lower",
    "i_value",
    "i_abs_err",
    "kappa_lower",
    "m0_upper",
    "lambda0_lower",
    "lambda0_upper",
    "wlsc_delta_s",
    "wlsc_beta",
    "lambda1_lower_wlsc",
    "kappa_lower_wlsc",
    "family_lambda1_lower",
    "family_kappa_lower",
    "quad_atol",
    "quad_rtol",
    "integral_atol",
    "integral_rtol",
];

fn bounds_row(source: &str, f: &ReportFile) -> Vec<String> {
    let r = &f.report;
    let t = &f.tolerances;
    let w = r.wlsc.as_ref();
    let fam = r.family_bounds.as_ref();
    vec![
        source.to_string(),
        f.config_hash.clone(),
        r.symbol.clone(),
        r.speed.clone(),
        fmt_f64(r.mu_total),
        fmt_f64(r.delta.value),
        fmt_f64(r.delta_plus.value),
        fmt_f64(r.delta_minus.value),
        fmt_opt(r.lambda1_lower),
        fmt_opt(r.i_value.map(|e| e.value)),
        fmt_opt(r.i_value.map(|e| e.abs_err)),
        fmt_opt(r.kappa_lower),
        fmt_opt(r.m0_upper),
        fmt_opt(r.lambda0_lower),
        fmt_opt(r.lambda0_upper),
        fmt_opt(w.map(|w| w.params.delta_s)),
        fmt_opt(w.map(|w| w.params.beta)),
        fmt_opt(w.and_then(|w| w.lambda1_lower_wlsc)),
        fmt_opt(w.and_then(|w| w.kappa_lower_wlsc)),
        fmt_opt(fam.and_then(|b| b.lambda1_lower)),
        fmt_opt(fam.and_then(|b| b.kappa_lower)),
        fmt_f64(t.quad_atol),
        fmt_f64(t.quad_rtol),
        fmt_f64(t.integral_atol),
        fmt_f64(t.integral_rtol),
    ]
}

/// Merges reports into `bounds.csv` (one row each, input order) and
/// `curves.csv` (curves stacked with a `source` column). Returns the paths
/// written.
pub fn merge_reports(inputs: &[PathBuf], out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    if inputs.is_empty() {
        return Err(Error::Config("report needs at least one input file".into()));
    }
    let files = inputs
        .iter()
        .map(|p| ReportFile::read(p).map(|f| (p.display().to_string(), f)))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(out_dir)?;
    let bounds_path = out_dir.join("bounds.csv");
    let curves_path = out_dir.join("curves.csv");

    let mut w = csv::Writer::from_path(&bounds_path)?;
    w.write_record(BOUNDS_COLUMNS)?;
    for (src, f) in &files {
        w.write_record(bounds_row(src, f))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(&curves_path)?;
    let mut header = vec!["source"];
    header.extend(CURVE_COLUMNS);
    w.write_record(&header)?;
    for (src, f) in &files {
        for p in &f.curve {
            let mut row = vec![src.clone()];
            row.extend(curve_fields(p));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok((bounds_path, curves_path))
}

/// Writes `text` followed by a newline to stderr, ignoring failures.
pub(crate) fn note(text: &str) {
    let _ = writeln!(std::io::stderr(), "{text}");
}
