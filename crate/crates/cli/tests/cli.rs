use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_timerep"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let data = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, data)
}

#[test]
fn gamow_starts_at_gamma_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["gamow", "--gamma", "0.5", "--n0", "1", "--t-max", "10", "--dt", "0.01", "--out", "r.csv"]);
    let (header, data) = rows(&std::fs::read_to_string(dir.path().join("r.csv")).unwrap());
    assert_eq!(header, ["t", "rate"]);
    assert_eq!(data.len(), 1001);
    assert_eq!(data[0][1], 0.5);
    assert!((data[200][1] - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
    assert!(dir.path().join("r.csv.manifest.json").exists());
    let summary = String::from_utf8(out.stderr).unwrap();
    assert_eq!(summary.lines().count(), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn interference_modulation_depth_is_a() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("gsi.json");
    let out = ok(dir.path(), &["interfere", "--config", cfg.to_str().unwrap(), "--t-max", "60", "--dt", "0.1"]);
    let (_, data) = rows(std::str::from_utf8(&out.stdout).unwrap());
    // divide out n0 λ_EC e^{-λt}; what remains is 1 + a cos(ωt + φ)
    let lambda_ec = 0.050188467444409333;
    let rel: Vec<f64> = data
        .iter()
        .map(|r| r[1] / (1e6 * lambda_ec * (-0.05 * r[0]).exp()) - 1.0)
        .collect();
    let hi = rel.iter().copied().fold(f64::MIN, f64::max);
    let lo = rel.iter().copied().fold(f64::MAX, f64::min);
    assert!((hi - 0.2).abs() < 1e-3, "max {hi}");
    assert!((lo + 0.2).abs() < 1e-3, "min {lo}");
}

#[test]
fn sample_then_fit_recovers_the_period() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("gsi.json");
    ok(dir.path(), &["sample", "--config", cfg.to_str().unwrap(), "--n0", "1000000", "--seed", "42", "--out", "ev.csv"]);
    assert!(dir.path().join("ev.csv.json").exists());
    let out = ok(dir.path(), &["fit", "--events", "ev.csv", "--dt", "0.5"]);
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let period = fit["period"].as_f64().unwrap();
    assert!((period - 7.0).abs() < 0.1, "T = {period}");
    assert_eq!(fit["model_tag"], "timerep");
    assert!(fit["converged"].as_bool().unwrap());
}

#[test]
fn replay_reproduces_outputs_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("gsi.json");
    ok(dir.path(), &["sample", "--config", cfg.to_str().unwrap(), "--n0", "20000", "--seed", "7", "--out", "ev.csv"]);
    ok(dir.path(), &["fit", "--events", "ev.csv", "--dt", "0.5", "--model", "all", "--out", "fit.json"]);
    let first_events = std::fs::read(dir.path().join("ev.csv")).unwrap();
    let first_fit = std::fs::read(dir.path().join("fit.json")).unwrap();
    std::fs::remove_file(dir.path().join("fit.json")).unwrap();
    ok(dir.path(), &["--replay", "ev.csv.manifest.json"]);
    ok(dir.path(), &["--replay", "fit.json.manifest.json"]);
    assert_eq!(std::fs::read(dir.path().join("ev.csv")).unwrap(), first_events);
    assert_eq!(std::fs::read(dir.path().join("fit.json")).unwrap(), first_fit);
}

#[test]
fn replay_uses_the_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("single.json");
    std::fs::copy(config("single.json"), &cfg).unwrap();
    ok(dir.path(), &["gamow", "--config", "single.json", "--t-max", "1", "--dt", "0.5", "--out", "g.csv"]);
    let before = std::fs::read(dir.path().join("g.csv")).unwrap();
    std::fs::write(&cfg, r#"{"components": [{"e_r": 1, "gamma": 9}]}"#).unwrap();
    ok(dir.path(), &["--replay", "g.csv.manifest.json"]);
    assert_eq!(std::fs::read(dir.path().join("g.csv")).unwrap(), before);
}

#[test]
fn config_values_override_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("single.json");
    let out = ok(dir.path(), &["gamow", "--config", cfg.to_str().unwrap(), "--gamma", "3", "--n0", "5", "--t-max", "0", "--dt", "1"]);
    let (_, data) = rows(std::str::from_utf8(&out.stdout).unwrap());
    // single.json: n0 = 1000, gamma = 0.5
    assert_eq!(data, vec![vec![0.0, 500.0]]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["gamow", "--gamma", "-1", "--t-max", "1", "--dt", "0.1"]).status.code(), Some(1));
    assert_eq!(run(d, &["tof", "--density", "appendix-timerep", "--alpha", "0"]).status.code(), Some(1));
    let unknown = run(d, &["gamow", "--bogus"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(d, &[]).status.code(), Some(2));
    assert_eq!(run(d, &["gamow", "--gamma", "1"]).status.code(), Some(2));
    assert_eq!(run(d, &["fit", "--dt", "0.5"]).status.code(), Some(2));
    assert_eq!(run(d, &["--replay", "missing.json"]).status.code(), Some(1));
    assert_eq!(run(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn unequal_widths_are_a_domain_error_for_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("kaon.json");
    let out = run(dir.path(), &["compare", "--config", cfg.to_str().unwrap(), "--t-max", "1", "--dt", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("equal widths"));
}

#[test]
fn compare_appendix_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["compare", "--alpha", "1", "--t-max", "2", "--dt", "2"]);
    let (header, data) = rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(header, ["t", "rate_timerep", "p_s", "ps_rate"]);
    let pi = std::f64::consts::PI;
    assert!((data[0][1] - 1.0 / pi).abs() < 1e-15);
    assert_eq!(&data[0][2..], &[1.0, 0.0]);
    assert!((data[1][1] - 1.0 / (5.0 * pi)).abs() < 1e-15);
    assert_eq!(&data[1][2..], &[0.5, 0.25]);
}

#[test]
fn transform_matches_the_lorentzian() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["transform", "--alpha", "2", "--t-max", "10", "--dt", "2.5"]);
    let (_, data) = rows(std::str::from_utf8(&out.stdout).unwrap());
    for r in data {
        let exact = 2.0 / (std::f64::consts::PI * (4.0 + r[0] * r[0]));
        assert!((r[1] / exact - 1.0).abs() < 1e-6, "t={} {} vs {exact}", r[0], r[1]);
    }
}

#[test]
fn hbar_rescales_time_and_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["gamow", "--gamma", "1", "--hbar", "2", "--t-max", "2", "--dt", "2"]);
    let (_, data) = rows(std::str::from_utf8(&out.stdout).unwrap());
    // Γ/ħ = 0.5 per unit time
    assert_eq!(data[0][1], 0.5);
    assert!((data[1][1] - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
}

#[test]
fn kaon_beams_differ_only_in_the_cross_term() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("kaon.json");
    let c = cfg.to_str().unwrap();
    let k = ok(dir.path(), &["kaon", "--config", c, "--t-max", "10", "--dt", "1"]);
    let kb = ok(dir.path(), &["kaon", "--config", c, "--t-max", "10", "--dt", "1", "--beam", "k0bar"]);
    let (_, k) = rows(std::str::from_utf8(&k.stdout).unwrap());
    let (_, kb) = rows(std::str::from_utf8(&kb.stdout).unwrap());
    for (a, b) in k.iter().zip(&kb) {
        let incoherent = 0.5 * ((-a[0]).exp() + 0.002 * (-0.002 * a[0]).exp());
        assert!((0.5 * (a[1] + b[1]) - incoherent).abs() < 1e-15);
    }
}

#[test]
fn time_of_flight_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["tof", "--gamma", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["mean"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let out = ok(dir.path(), &["tof", "--density", "appendix-timerep", "--alpha", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["mean"].is_null());
    assert_eq!(v["defined"]["mean"], false);
}

#[test]
fn json_series_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["gamow", "--gamma", "1", "--t-max", "1", "--dt", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["t", "rate"]));
    assert_eq!(v["rows"][0][1].as_f64(), Some(1.0));
}

#[test]
fn fit_with_zero_time_window() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["sample", "--gamma", "1", "--n0", "200000", "--seed", "3", "--t-max", "12", "--out", "ev.csv"]);
    let out = ok(dir.path(), &["fit", "--events", "ev.csv", "--dt", "0.05", "--zero-time-bins", "10"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["zero_time"]["favored"], "nonzero");
    let r0 = v["zero_time"]["extrapolated_rate"].as_f64().unwrap();
    assert!((r0 - 1.0).abs() < 0.05, "{r0}");
}
