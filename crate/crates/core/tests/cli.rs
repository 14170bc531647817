use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use levygap::config::{RunConfig, PRESETS};
use levygap::report::{ReportFile, BOUNDS_COLUMNS, REPORT_SCHEMA};

fn levygap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levygap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn every_preset_round_trips_through_report() {
    let tmp = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for name in PRESETS {
        let out = tmp.path().join(name);
        let o = levygap(&["analyze", "--preset", name, "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let file = ReportFile::read(&out.join("report.json")).unwrap();
        assert_eq!(file.schema, REPORT_SCHEMA);
        assert_eq!(file.config_hash, RunConfig::preset(name).unwrap().hash());
        assert_eq!(file.report.provenance.config_hash, file.config_hash);
        assert!(file.report.lambda1_lower.unwrap() > 0.0);
        let (header, rows) = csv_rows(&out.join("curves.csv"));
        assert_eq!(header, ["x", "h", "mu_tail", "mu_right", "mu_left", "objective"]);
        assert_eq!(rows.len(), file.curve.len());
        reports.push(out.join("report.json"));
    }
    let merged = tmp.path().join("merged");
    let mut args = vec!["report", "--out", s(&merged)];
    args.extend(reports.iter().map(|p| s(p)));
    assert_eq!(code(&levygap(&args)), 0);
    let (header, rows) = csv_rows(&merged.join("bounds.csv"));
    assert_eq!(header, BOUNDS_COLUMNS);
    assert_eq!(rows.len(), PRESETS.len());
    let (header, rows) = csv_rows(&merged.join("curves.csv"));
    assert_eq!(header[0], "source");
    assert_eq!(rows.len(), 4 * 200);
}

#[test]
fn report_rows_for_different_tolerances() {
    let tmp = tempfile::tempdir().unwrap();
    let base = RunConfig::preset("brownian-exp").unwrap();
    let mut paths = Vec::new();
    for (i, rtol) in [1e-8, 1e-6].into_iter().enumerate() {
        let mut cfg = base.clone();
        cfg.quad.rtol = rtol;
        cfg.bounds.integral_rtol = rtol;
        let p = write_config(tmp.path(), &format!("c{i}.json"), &serde_json::to_string(&cfg).unwrap());
        let out = tmp.path().join(format!("o{i}"));
        assert_eq!(code(&levygap(&["analyze", "--config", s(&p), "--out", s(&out)])), 0);
        paths.push(out.join("report.json"));
    }
    let merged = tmp.path().join("m");
    assert_eq!(code(&levygap(&["report", "--out", s(&merged), s(&paths[0]), s(&paths[1])])), 0);
    let (header, rows) = csv_rows(&merged.join("bounds.csv"));
    assert_eq!(rows.len(), 2);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_ne!(rows[0][col("integral_rtol")], rows[1][col("integral_rtol")]);
    for name in ["delta", "lambda1_lower", "kappa_lower"] {
        let a: f64 = rows[0][col(name)].parse().unwrap();
        let b: f64 = rows[1][col(name)].parse().unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs(), "{name}: {a} vs {b}");
    }

    // Single report, single row.
    let one = tmp.path().join("one");
    assert_eq!(code(&levygap(&["report", "--out", s(&one), s(&paths[0])])), 0);
    assert_eq!(csv_rows(&one.join("bounds.csv")).1.len(), 1);
}

#[test]
fn report_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&levygap(&["report", "--out", s(tmp.path())])), 64);
    let junk = write_config(tmp.path(), "junk.json", r#"{"schema":"something.else/2"}"#);
    assert_eq!(code(&levygap(&["report", s(&junk)])), 65);
    let broken = write_config(tmp.path(), "broken.json", "not json");
    assert_eq!(code(&levygap(&["report", s(&broken)])), 65);
    let partial = write_config(tmp.path(), "partial.json", &format!(r#"{{"schema":"{REPORT_SCHEMA}"}}"#));
    assert_eq!(code(&levygap(&["report", s(&partial)])), 65);
}

#[test]
fn infinite_mass_gives_no_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_config(
        tmp.path(),
        "flat.json",
        r#"{"symbol":{"family":"stable","params":{"alpha":1.5}},"speed":{"family":"constant","params":{"c":1}}}"#,
    );
    let o = levygap(&["analyze", "--config", s(&p), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypothesis fails"));
}

#[test]
fn failed_condition_gives_no_bound() {
    let tmp = tempfile::tempdir().unwrap();
    // α < 1: points are polar, condition A2 fails.
    let p = write_config(
        tmp.path(),
        "c.json",
        r#"{"symbol":{"family":"stable","params":{"alpha":0.7}},"speed":{"family":"exp_growth","params":{"b":1}}}"#,
    );
    assert_eq!(code(&levygap(&["analyze", "--config", s(&p), "--out", s(tmp.path())])), 2);
}

#[test]
fn config_errors_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(
        tmp.path(),
        "bad.json",
        r#"{"symbol":{"family":"stable","params":{"alpha":1.5}},"speed":{"family":"exp_growth","params":{"b":1}},"colour":"red"}"#,
    );
    assert_eq!(code(&levygap(&["analyze", "--config", s(&bad)])), 64);
    assert_eq!(code(&levygap(&["analyze", "--config", s(&tmp.path().join("missing.json"))])), 64);
    assert_eq!(code(&levygap(&["analyze", "--preset", "brownian-exp", "--config", s(&bad)])), 64);
    assert_eq!(code(&levygap(&["simulate", "--preset", "stable", "--threads", "0"])), 64);
    let no_sim = write_config(
        tmp.path(),
        "nosim.json",
        r#"{"symbol":{"family":"brownian"},"speed":{"family":"exp_growth","params":{"b":1}}}"#,
    );
    assert_eq!(code(&levygap(&["simulate", "--config", s(&no_sim)])), 64);
}

#[test]
fn tabulated_symbol_analyzes_but_does_not_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let mut table = String::from("xi,psi\n");
    for i in 0..=400 {
        let xi = 10f64.powf(-4.0 + 8.0 * i as f64 / 400.0);
        table.push_str(&format!("{xi},{}\n", xi * xi));
    }
    std::fs::write(tmp.path().join("psi.csv"), table).unwrap();
    let p = write_config(
        tmp.path(),
        "tab.json",
        r#"{"symbol":{"family":"tabulated","table":"psi.csv","tail_exponent":2},
            "speed":{"family":"exp_growth","params":{"b":1}},
            "bounds":{"certificate_points":0,"wlsc":false},
            "sim":{"n_paths":10,"T":1}}"#,
    );
    let out = tmp.path().join("o");
    let o = levygap(&["analyze", "--config", s(&p), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let file = ReportFile::read(&out.join("report.json")).unwrap();
    assert!((file.report.delta.value - (-1f64).exp()).abs() < 1e-4);
    assert_eq!(code(&levygap(&["simulate", "--config", s(&p), "--out", s(&out)])), 3);
}

#[test]
fn simulate_is_reproducible_and_rejects_constant_observable() {
    let tmp = tempfile::tempdir().unwrap();
    let text = |obs: &str| {
        format!(
            r#"{{"symbol":{{"family":"brownian"}},"speed":{{"family":"exp_growth","params":{{"b":1}}}},
                "sim":{{"n_paths":500,"T":4,"dt":0.01,"seed":5,"observable":{obs},"init":{{"point":2}},
                        "fit":{{"bootstrap":20}},"return_time":{{"n_paths":200}}}}}}"#
        )
    };
    let p = write_config(tmp.path(), "sim.json", &text(r#"{"clipped":{"cap":1}}"#));
    let mut outs = Vec::new();
    for i in 0..2 {
        let out = tmp.path().join(format!("o{i}"));
        assert_eq!(code(&levygap(&["simulate", "--config", s(&p), "--out", s(&out)])), 0);
        outs.push(std::fs::read(out.join("ensemble.json")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let other = tmp.path().join("o2");
    assert_eq!(code(&levygap(&["simulate", "--config", s(&p), "--seed", "6", "--out", s(&other)])), 0);
    assert_ne!(outs[0], std::fs::read(other.join("ensemble.json")).unwrap());

    let v: serde_json::Value = serde_json::from_slice(&outs[0]).unwrap();
    let d = &v["decay"];
    assert!(d["ci_low"].as_f64() <= d["rate"].as_f64() && d["rate"].as_f64() <= d["ci_high"].as_f64());
    assert_eq!(v["comparison"]["verdict"], "consistent");
    assert!(v.get("timings").is_none());

    let c = write_config(tmp.path(), "const.json", &text(r#"{"constant":{"value":1}}"#));
    assert_eq!(code(&levygap(&["simulate", "--config", s(&c), "--out", s(tmp.path())])), 1);
}

#[test]
fn output_dir_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_config(
        tmp.path(),
        "c.json",
        r#"{"symbol":{"family":"brownian"},"speed":{"family":"exp_growth","params":{"b":1}},
            "bounds":{"certificate_points":0},"output":{"dir":"results"}}"#,
    );
    assert_eq!(code(&levygap(&["analyze", "--config", s(&p)])), 0);
    assert!(tmp.path().join("results/report.json").exists());
}
