//! Command-line front end: `analyze`, `simulate` and `report`.
//!
//! Exit codes: 0 success, 1 computational error, 2 no bound derivable,
//! 3 unsupported family, 64 usage or configuration error, 65 report schema
//! mismatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bounds::{analyze, compute_delta, compute_i_and_kappa, lambda1_lower};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::harmonic::HarmonicEvaluator;
use crate::report::{
    merge_reports, note, write_curves_csv, write_json, write_paths_csv, Comparison, EnsembleFile, ReportFile, Timings,
    ENSEMBLE_SCHEMA,
};
use crate::sim::process::{Increments, Stepper};
use crate::sim::{estimate_decay_rate, estimate_return_time, mean_curve, simulate_ensemble};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_BOUND: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SCHEMA: i32 = 65;

#[derive(Debug, Parser)]
#[command(name = "levygap", version, about = "Spectral-gap and strong-ergodicity bounds for time-changed symmetric Lévy processes")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the analytic bounds and write report.json and curves.csv.
    Analyze(RunArgs),
    /// Run the Monte Carlo check and write ensemble.json.
    Simulate(SimArgs),
    /// Merge report.json files into bounds.csv and curves.csv.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// stable, brownian-exp, stable-mixture or cauchy-brownian.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Overrides sim.seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NoBound(_) | Error::InfiniteMass(_) => EXIT_NO_BOUND,
        Error::Unsupported(_) => EXIT_UNSUPPORTED,
        Error::Config(_) => EXIT_USAGE,
        Error::Schema { .. } => EXIT_SCHEMA,
        _ => EXIT_ERROR,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            note(&format!("error: {e}"));
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Simulate(s) => cmd_simulate(&s),
        Command::Report(r) => cmd_report(&r),
    })
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    match (&args.config, &args.preset) {
        (Some(path), _) => RunConfig::load(path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
            other => other,
        }),
        (None, Some(name)) => RunConfig::preset(name),
        (None, None) => Err(Error::Config("one of --config or --preset is required".into())),
    }
}

fn out_dir(flag: &Option<PathBuf>, cfg: Option<&RunConfig>) -> Result<PathBuf> {
    let dir = flag
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.dir.as_ref().map(|d| c.base_dir.join(d))))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn cmd_analyze(args: &RunArgs) -> Result<i32> {
    let start = Instant::now();
    let cfg = load(args)?;
    let psi = cfg.symbol()?;
    let sp = cfg.speed()?;
    let t0 = Instant::now();
    let report = analyze(&psi, &sp, &cfg.quad, &cfg.bounds)?;
    let analyze_seconds = t0.elapsed().as_secs_f64();
    let has_bound = report.has_bound();
    let dir = out_dir(&args.out, Some(&cfg))?;
    let file = ReportFile::new(
        &cfg,
        report,
        Timings {
            analyze_seconds,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    );
    write_curves_csv(&dir.join("curves.csv"), &file.curve)?;
    write_json(&dir.join("report.json"), &file)?;
    for d in &file.report.diagnostics {
        note(&format!("note: {d}"));
    }
    if has_bound {
        Ok(EXIT_OK)
    } else {
        note("no bound derivable: neither δ nor I is finite");
        Ok(EXIT_NO_BOUND)
    }
}

pub fn cmd_simulate(args: &SimArgs) -> Result<i32> {
    let cfg = load(&args.run)?;
    let mut sim = cfg
        .sim
        .clone()
        .ok_or_else(|| Error::Config("simulate needs a `sim` block".into()))?;
    if let Some(seed) = args.seed {
        sim.seed = seed;
    }
    let psi = cfg.symbol()?;
    let sp = cfg.speed()?;
    Increments::from_symbol(&psi)?;
    let target = match sim.target {
        Some(t) => t,
        None => sim.observable.stationary_mean(&sp)?,
    };

    let ens = simulate_ensemble(&psi, &sp, &sim)?;
    let decay = estimate_decay_rate(&ens, &sim.observable, &sp, Some(target), &sim.fit)?;
    let curve = mean_curve(&ens, &sim.observable);
    if ens.truncated > 0 {
        note(&format!(
            "note: {} of {} paths hit max_base_steps before T",
            ens.truncated, ens.n_paths
        ));
    }

    let return_time = match &sim.return_time {
        Some(rt) => {
            let stepper = Stepper::new(sim.dt(), sim.far_field, &sp)?;
            Some(estimate_return_time(
                &psi,
                &sp,
                rt.eps,
                rt.x0,
                rt.n_paths,
                &stepper,
                rt.horizon.unwrap_or(sim.horizon),
                sim.max_base_steps,
                sim.seed,
            )?)
        }
        None => None,
    };

    let ev = HarmonicEvaluator::with_options(psi.clone(), cfg.quad, true)?;
    let lambda1 = match compute_delta(&ev, &sp, &cfg.bounds.scan) {
        Ok(d) => d.delta.finite().map(lambda1_lower).transpose()?,
        Err(Error::NoBound(_)) | Err(Error::InfiniteMass(_)) => None,
        Err(e) => return Err(e),
    };
    let m0 = match compute_i_and_kappa(&ev, &sp, &cfg.bounds.tolerance()) {
        Ok(v) => Some(v.m0_upper),
        Err(Error::NoBound(_)) | Err(Error::InfiniteMass(_)) => None,
        Err(e) => return Err(e),
    };
    let comparison = Comparison::new(lambda1, &decay, m0, return_time.as_ref());

    let dir = out_dir(&args.run.out, Some(&cfg))?;
    if sim.per_path_csv {
        write_paths_csv(&dir.join("paths.csv"), &ens.times, &ens.paths)?;
    }
    let mut hashed = cfg.clone();
    hashed.sim = Some(sim.clone());
    let file = EnsembleFile {
        schema: ENSEMBLE_SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: hashed.hash(),
        symbol: ens.symbol.clone(),
        speed: ens.speed.clone(),
        sim,
        truncated_paths: ens.truncated,
        observable: decay.observable.clone(),
        target,
        mean_curve: curve,
        decay,
        return_time,
        comparison,
    };
    write_json(&dir.join("ensemble.json"), &file)?;
    Ok(EXIT_OK)
}

pub fn cmd_report(args: &ReportArgs) -> Result<i32> {
    let dir = out_dir(&args.out, None)?;
    merge_reports(&args.inputs, &dir)?;
    Ok(EXIT_OK)
}

/// Convenience for tests and the C API: analyze a config document given as
/// a JSON string, returning `report.json` contents.
pub fn analyze_json(config: &str, base_dir: &Path) -> Result<String> {
    let start = Instant::now();
    let cfg = RunConfig::from_json(config, base_dir)?;
    let report = analyze(&cfg.symbol()?, &cfg.speed()?, &cfg.quad, &cfg.bounds)?;
    let secs = start.elapsed().as_secs_f64();
    let file = ReportFile::new(
        &cfg,
        report,
        Timings {
            analyze_seconds: secs,
            total_seconds: secs,
        },
    );
    Ok(serde_json::to_string(&file)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NoBound("x".into())), 2);
        assert_eq!(exit_code(&Error::InfiniteMass("x".into())), 2);
        assert_eq!(exit_code(&Error::Unsupported("x".into())), 3);
        assert_eq!(exit_code(&Error::Config("x".into())), 64);
        assert_eq!(
            exit_code(&Error::Schema {
                path: "a".into(),
                message: "b".into()
            }),
            65
        );
        assert_eq!(exit_code(&Error::NoSignal("x".into())), 1);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["levygap"]), EXIT_USAGE);
        assert_eq!(run(["levygap", "analyze"]), EXIT_USAGE);
        assert_eq!(run(["levygap", "analyze", "--preset", "nope"]), EXIT_USAGE);
        assert_eq!(run(["levygap", "report"]), EXIT_USAGE);
        assert_eq!(run(["levygap", "--help"]), EXIT_OK);
    }
}
