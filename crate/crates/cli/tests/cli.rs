use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kgscatter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgscatter")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn run_ok(args: &[&str]) {
    let o = kgscatter(args);
    assert!(o.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&o.stderr));
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

const SMALL_SIM: &str = r#""half_length": 100, "n_points": 1024, "horizon": 4"#;

#[test]
fn zero_amplitude_gives_zero_series() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &format!(r#"{{"sim": {{{SMALL_SIM}, "epsilon": 0}}}}"#));
    let out = tmp.path().join("out");
    run_ok(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    let rows: Vec<&str> = series.lines().skip(1).collect();
    assert!(rows.len() > 5);
    for row in rows {
        assert!(row.split(',').skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0), "{row}");
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["final_sup"], 0.0);
    assert_eq!(report["config"]["sim"]["epsilon"], 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &format!(r#"{{"sim": {{{SMALL_SIM}}}}}"#));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap(), "--seedless"]);
    run_ok(&["simulate", "--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(files(&a), files(&b));
}

#[test]
fn nonresonant_echoed_config_reproduces_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"sim": {"half_length": 150, "n_points": 2048, "horizon": 16, "beta0": 1.0,
                    "alpha": {"kind": "gaussian", "amplitude": 1.0, "sigma": 1.0, "deresonate_window": 2.0}},
            "predict_points": [[16, 0], [16, 5]]}"#,
    );
    let a = tmp.path().join("a");
    run_ok(&["nonresonant", "--config", &cfg, "--out", a.to_str().unwrap()]);
    let first = fs::read_to_string(a.join("report.json")).unwrap();
    let v: Value = serde_json::from_str(&first).unwrap();
    assert!(v["version"].as_str().unwrap().starts_with("kgscatter"));
    let echoed = write_config(tmp.path(), "echo.json", &serde_json::to_string(&v["config"]).unwrap());
    let b = tmp.path().join("b");
    run_ok(&["nonresonant", "--config", &echoed, "--out", b.to_str().unwrap()]);
    assert_eq!(first, fs::read_to_string(b.join("report.json")).unwrap());
    assert!(b.join("normalform.json").exists());
    assert!(v["report"]["normal_form_relative"].as_f64().unwrap() < 1e-8);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write_config(tmp.path(), "u.json", r#"{"windw": 3}"#);
    assert_eq!(kgscatter(&["localdecay", "--config", &unknown]).status.code(), Some(2));
    let invalid = write_config(tmp.path(), "i.json", r#"{"sim": {"epsilon": 30}}"#);
    assert_eq!(kgscatter(&["simulate", "--config", &invalid]).status.code(), Some(2));
    let missing = tmp.path().join("missing.json");
    assert_eq!(kgscatter(&["oscint", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    let broken = write_config(tmp.path(), "b.json", "{");
    let o = kgscatter(&["resonant", "--config", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
    let resonant = write_config(tmp.path(), "r.json", &format!(r#"{{"sim": {{{SMALL_SIM}, "beta0": 1.0}}}}"#));
    assert_eq!(kgscatter(&["nonresonant", "--config", &resonant]).status.code(), Some(2));
}

#[test]
fn tripped_guard_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "g.json", &format!(r#"{{"sim": {{{SMALL_SIM}, "epsilon": 0.5, "energy_abort": 1e-15}}}}"#));
    let o = kgscatter(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("energy drift"));
}

#[test]
fn print_config_echoes_defaults() {
    let o = kgscatter(&["localdecay", "--print-config"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["window"], 40.0);
    assert_eq!(v["variants"].as_array().unwrap().len(), 3);
}

#[test]
fn small_oscint_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "o.json", r#"{"lambdas": [20, 40], "convergence_densities": [40, 80]}"#);
    let out = tmp.path().join("o");
    run_ok(&["oscint", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let table = fs::read_to_string(out.join("stationary_phase.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    let cubic = fs::read_to_string(out.join("cubic_phases.csv")).unwrap();
    assert!(cubic.starts_with("j,xi,newton,eta,sigma,value,det,signature"));
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(v["report"]["abs_exponent"].as_f64().unwrap() < -1.5);
    assert!(out.join("stationary_phase.plt").exists());
}

#[test]
fn small_localdecay_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "l.json",
        r#"{"half_length": 200, "n_points": 2048, "window": 10, "t_min": 5, "t_max": 40, "samples": 4}"#,
    );
    let out = tmp.path().join("l");
    run_ok(&["localdecay", "--config", &cfg, "--out", out.to_str().unwrap()]);
    for name in ["plain", "px_over_bracket", "bracket_minus_one"] {
        let csv = fs::read_to_string(out.join(format!("decay_{name}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 5, "{name}");
    }
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["hierarchy"], true);
}

#[test]
fn sweep_writes_one_directory_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        &format!(r#"{{"target": "simulate", "sim": {{{SMALL_SIM}}}, "epsilons": [0.01, 0.02], "amplitudes": [1.0]}}"#),
    );
    let out = tmp.path().join("s");
    run_ok(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(out.join("eps0.01_amp1").join("series.csv").exists());
    assert!(out.join("eps0.02_amp1").join("series.csv").exists());
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let points = v["report"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    let sup = |i: usize| points[i]["final_sup"].as_f64().unwrap();
    assert!((sup(1) / sup(0) - 2.0).abs() < 0.05);
}
