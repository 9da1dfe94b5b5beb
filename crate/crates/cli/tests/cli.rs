use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spectral-lab-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(dir: &PathBuf, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-lab"))
        .args(args)
        .env("SPECTRAL_LAB_OUTPUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn spectrum_writes_bound_state_csv() {
    let dir = scratch("spectrum");
    let o = run(&dir, &["wvn", "spectrum", "--alpha", "2.6457513", "--window", "100000", "--tol", "1e-10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.join("wvn_spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,energy,side,leakage,resolved"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert!(first[1].parse::<f64>().unwrap().abs() > 2.0);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn polarization_reports_max_error() {
    let dir = scratch("poln");
    let o = run(&dir, &["identity", "poln", "--seed", "7", "--trials", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max relative error"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn free_line_certificate_json() {
    let dir = scratch("cert");
    let o = run(&dir, &["--format", "json", "criticality", "--model", "free-1d", "--v", "0:1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("criticality.json")).unwrap()).unwrap();
    assert!((v["oracle_eigenvalue"].as_f64().unwrap() - 2.236068).abs() < 1e-6);
    assert_eq!(v["sign"], "Q+V");
    assert_eq!(v["cutoff_kind"], "linear_1d");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_certificate_exit_codes() {
    let dir = scratch("notfound");
    assert_eq!(run(&dir, &["criticality", "--model", "free-1d", "--v", ""]).status.code(), Some(1));
    let o = run(&dir, &["criticality", "--model", "free-1d", "--v", "", "--expect", "not-found"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(dir.join("criticality.csv")).unwrap().starts_with("outcome,reason,last_N,cutoff_energy\n"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn input_errors_exit_two() {
    let dir = scratch("usage");
    let o = run(&dir, &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&dir, &["wvn", "build", "--alpha", "0.2"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["criticality", "--v", "0:x"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["cutoff", "energy", "-m", "5", "-n", "2"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["acceptance", "--criterion", "11"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["--help"]).status.code(), Some(0));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn failed_checks_exit_one() {
    let dir = scratch("failed");
    let o = run(&dir, &["wvn", "lower-bound"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("below 1"));
    let csv = fs::read_to_string(dir.join("wvn_lower_bound.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = scratch("determinism");
    let args = ["wvn", "bargmann", "--window", "20000", "--k-max", "12"];
    run(&dir, &args);
    let first = fs::read(dir.join("wvn_bargmann.csv")).unwrap();
    run(&dir, &args);
    assert_eq!(first, fs::read(dir.join("wvn_bargmann.csv")).unwrap());
    let args = ["--format", "json", "envelope", "--sites", "20000"];
    run(&dir, &args);
    let first = fs::read(dir.join("envelope.json")).unwrap();
    run(&dir, &args);
    assert_eq!(first, fs::read(dir.join("envelope.json")).unwrap());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn explicit_output_path_wins() {
    let dir = scratch("explicit");
    let target = dir.join("sub").join("energy.json");
    let o = run(
        &dir,
        &["--format", "json", "-o", target.to_str().unwrap(), "cutoff", "energy", "--model", "constant", "--cutoff", "log", "-m", "1", "-n", "2.718281828459045"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["columns"][4], "energy");
    assert!((v["rows"][0][4].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-6);
    assert!(!dir.join("cutoff_energy.json").exists());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn single_acceptance_criterion() {
    let dir = scratch("acceptance");
    let o = run(&dir, &["--format", "json", "acceptance", "--criterion", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("A7  PASS"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("acceptance_7.json")).unwrap()).unwrap();
    assert_eq!(v[0]["criterion"], 7);
    let o = run(&dir, &["acceptance", "--criterion", "6"]);
    assert_eq!(o.status.code(), Some(1));
    fs::remove_dir_all(&dir).unwrap();
}
