//! End-to-end CLI checks: exit codes, determinism, CSV contents.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mixtherm")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("MIXTHERM_THREADS")
        .output()
        .expect("spawn mixtherm")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

const CLASSICAL_FERMI: &str = r#"{
  "species": [
    {"label": "e", "mass": 1.0, "spin_degeneracy": 2, "statistics": "fermi", "density": 1e-8}
  ],
  "thetas": [50.0, 75.0, 100.0]
}"#;

#[test]
fn ideal_tau_classical_ratio_near_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CLASSICAL_FERMI);
    let out = run(&["ideal-tau", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("ideal_tau.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "theta,rho,alpha_e,tau,tau_over_theta"
    );
    for line in lines {
        let ratio: f64 = line.split(',').next_back().unwrap().parse().unwrap();
        assert!((ratio - 1.0).abs() < 1e-6, "τ/θ = {ratio}");
    }
    // Report written alongside.
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["command"], "ideal-tau");
    assert_eq!(report["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CLASSICAL_FERMI);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let st = run(&["ideal-tau", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(st.status.success());
    }
    let a = fs::read(out_a.join("ideal_tau.csv")).unwrap();
    let b = fs::read(out_b.join("ideal_tau.csv")).unwrap();
    assert_eq!(a, b, "CSV bodies must be byte-identical");
}

#[test]
fn malformed_json_exits_2_with_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{ \"species\": [ }");
    let out = run(&["ideal-tau", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr is a JSON error record");
    assert_eq!(record["error"]["kind"], "config");
    assert!(record["error"]["path"].as_str().unwrap().contains("line"));
}

#[test]
fn unknown_species_reference_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "species": [
    {"label": "e", "mass": 1.0, "spin_degeneracy": 2, "statistics": "fermi", "density": 1e-3}
  ],
  "potentials": [{"a": "e", "b": "x", "form": {"type": "gaussian", "k0": 0.1, "r0": 1.0}}],
  "theta": 10.0
}"#,
    );
    let out = run(&["thermo", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["path"], "/potentials/0/b");
}

#[test]
fn condensate_scan_refused_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "species": [
    {"label": "b", "mass": 1.0, "spin_degeneracy": 1, "statistics": "bose", "density": 1.0}
  ],
  "theta_grid": {"lo": 0.5, "hi": 6.0, "n": 40}
}"#,
    );
    let refused = run(&["condensate-scan", "--config", &cfg]);
    assert_eq!(refused.status.code(), Some(4));
    let record: serde_json::Value = serde_json::from_slice(&refused.stderr).unwrap();
    assert_eq!(record["error"]["kind"], "experimental");

    let ok = run(&["condensate-scan", "--config", &cfg, "--allow-experimental"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    let warnings = report["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("EXPERIMENTAL")));
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("onset")));
    let csv = fs::read_to_string(dir.path().join("condensate_scan.csv")).unwrap();
    assert!(csv.lines().next().unwrap() == "theta,tau,saturated");
    assert!(csv.contains(",1\n"), "some scanned θ must be saturated");
}

#[test]
fn thermo_with_potential_and_boltzmann_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "species": [
    {"label": "a", "mass": 1.0, "spin_degeneracy": 2, "statistics": "fermi", "density": 0.01}
  ],
  "potentials": [{"a": "a", "b": "a", "form": {"type": "gaussian", "k0": 0.5, "r0": 1.0}}],
  "correlation": "classical-boltzmann",
  "theta": 5.0
}"#,
    );
    let out = run(&["thermo", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("thermo.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let (tau, kin, energy, pressure): (f64, f64, f64, f64) = (
        row[2].parse().unwrap(),
        row[3].parse().unwrap(),
        row[4].parse().unwrap(),
        row[5].parse().unwrap(),
    );
    // Repulsive potential: the interaction raises E above kinetic, and
    // K′ < 0 makes the virial term raise p above ρτ.
    assert!(energy > kin);
    assert!(pressure > 0.01 * tau);
}

#[test]
fn tabulated_potential_csv_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    // Gaussian samples; dense grid so the spline is faithful.
    let mut pot_csv = String::from("r,K\n");
    for i in 0..400 {
        let r = i as f64 * 0.025;
        pot_csv.push_str(&format!("{},{}\n", r, 0.5 * (-(r * r)).exp()));
    }
    fs::write(dir.path().join("pot.csv"), pot_csv).unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "species": [
    {"label": "a", "mass": 1.0, "spin_degeneracy": 2, "statistics": "fermi", "density": 0.01}
  ],
  "potentials": [{"a": "a", "b": "a", "csv": "pot.csv"}],
  "correlation": "unity",
  "theta": 5.0
}"#,
    );
    let out = run(&["thermo", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn tau_field_and_tolerance_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "species": [
    {"label": "a", "mass": 1.0, "spin_degeneracy": 2, "statistics": "fermi", "density": 2e-6}
  ],
  "theta_grid": {"lo": 8.0, "hi": 20.0, "n": 6},
  "rho_grid": {"lo": 1e-6, "hi": 5e-6, "n": 5},
  "tolerances": {"characteristic_rtol": 1e-10}
}"#,
    );
    let out = run(&["tau-field", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("tau_field.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 * 5);
    // K ≡ 0 here, so τ ≈ θ in this classical window.
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((cols[2] / cols[0] - 1.0).abs() < 1e-4, "{line}");
    }
}

#[test]
fn ns_check_and_gk_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "species": [
    {"label": "a", "mass": 1.0, "spin_degeneracy": 2, "statistics": "fermi", "density": 0.2},
    {"label": "b", "mass": 1.5, "spin_degeneracy": 1, "statistics": "bose", "density": 0.1}
  ],
  "ns": {"tau": 1.0, "dim": 3, "cases": [[1, 0], [2, 1], [1, 1]]},
  "gk": [
    {"k": 0, "alpha": -30.0, "statistics": "fermi"},
    {"k": 1, "alpha": 2.5, "statistics": "fermi"},
    {"k": 0, "alpha": -1.0, "statistics": "bose"}
  ]
}"#,
    );
    let out = run(&["ns-check", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("ns_check.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let resid: f64 = line.split(',').next_back().unwrap().parse().unwrap();
        assert!(resid < 1e-10, "{line}");
    }

    let out = run(&["gk", "--config", &cfg]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("gk.csv")).unwrap();
    let first: f64 = csv.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    // Laplace limit: (√π/4)e^{−30}.
    let expect = 0.25 * std::f64::consts::PI.sqrt() * (-30.0f64).exp();
    assert!((first / expect - 1.0).abs() < 1e-8);
}

#[test]
fn validate_all_rows_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "species": [
    {"label": "a", "mass": 1.0, "spin_degeneracy": 2, "statistics": "fermi", "density": 0.1}
  ]
}"#,
    );
    let out = run(&["validate", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows.len() >= 8);
    for line in &rows {
        assert!(line.ends_with(",1"), "suite row failed: {line}");
    }
}

#[test]
fn threads_flag_and_env_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CLASSICAL_FERMI);
    let out = run(&["ideal-tau", "--config", &cfg, "--threads", "2"]);
    assert!(out.status.success());
    let out = Command::new(bin())
        .args(["ideal-tau", "--config", &cfg])
        .env("MIXTHERM_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(bin())
        .args(["ideal-tau", "--config", &cfg])
        .env("MIXTHERM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // Saturated Bose state: solve_ideal must fail numerically.
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
  "species": [
    {"label": "b", "mass": 1.0, "spin_degeneracy": 1, "statistics": "bose", "density": 5.0}
  ],
  "thetas": [0.5]
}"#,
    );
    let out = run(&["ideal-tau", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["kind"], "numeric");
}
