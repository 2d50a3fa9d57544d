use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gaugeflow::expr::parse_expr;

fn gaugeflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaugeflow")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.ini");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn column(csv: &str, name: &str) -> Vec<Option<f64>> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).expect("column");
    lines.map(|l| l.split(',').nth(idx).unwrap()).map(|v| (!v.is_empty()).then(|| v.parse().unwrap())).collect()
}

#[test]
fn derive_dg_current() {
    let out = gaugeflow(&["derive", "--model", "dg"]);
    assert!(out.status.success());
    let j = parse_expr(json(&out)["j_psi"].as_str().unwrap()).unwrap();
    assert!(j.equivalent(&parse_expr("S_1/m*rho + D*rho_1").unwrap()));
}

#[test]
fn derive_zero_potential() {
    let out = gaugeflow(&["derive", "--potential", "0"]);
    assert!(out.status.success());
    let v = json(&out);
    for key in ["U", "W", "calW", "G", "source", "theta_integrand"] {
        assert_eq!(v[key], "0", "{key}");
    }
    assert_eq!(v["conserves_N"], true);
}

#[test]
fn derive_check_paper_and_errors() {
    assert_eq!(gaugeflow(&["derive", "--model", "eip", "--check-paper"]).status.code(), Some(0));
    assert_eq!(gaugeflow(&["derive", "--model", "dg", "--check-paper"]).status.code(), Some(0));
    let bad = gaugeflow(&["derive", "--potential", "rho^"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--potential"));
    assert_eq!(gaugeflow(&["derive", "--model", "nosuch"]).status.code(), Some(2));
    assert_eq!(gaugeflow(&["derive", "--model", "dg", "--param", "kappa=1"]).status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_2() {
    assert_eq!(gaugeflow(&["verify", "nosuch"]).status.code(), Some(2));
}

#[test]
fn verify_linearize_passes() {
    let out = gaugeflow(&["verify", "linearize"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS dg linearization density error"));
}

#[test]
fn bad_grid_size_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\nN = 100\n");
    let out = gaugeflow(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.N"));
}

#[test]
fn free_run_conserves_norm_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\nN = 128\n[time]\nT = 0.05\nsnapshot_every = 50\n");
    let runs: Vec<String> = ["a", "b"]
        .iter()
        .map(|name| {
            let out_dir = dir.path().join(name);
            let out = gaugeflow(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            assert!(out_dir.join("snapshots_psi.csv").exists() && out_dir.join("manifest.json").exists());
            fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let a = fs::read(dir.path().join("a/snapshots_psi.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/snapshots_psi.csv")).unwrap());
    let norms: Vec<f64> = column(&runs[0], "norm").into_iter().flatten().collect();
    assert_eq!(norms.len(), 11);
    assert!(norms.iter().all(|n| ((n - norms[0]) / norms[0]).abs() <= 1e-10));
}

#[test]
fn dg_both_gauge_density_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!(
            "[model]\nname = dg\nD = 0.05\n[grid]\nN = 128\n[time]\nT = 0.05\nsnapshot_every = 100\n[output]\ndir = {}\nequation = both\n",
            out_dir.display()
        ),
    );
    let out = gaugeflow(&["simulate", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let diag = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,norm,continuity_residual,eq19_residual,gauge_density_error\n"));
    let gauge: Vec<f64> = column(&diag, "gauge_density_error").into_iter().flatten().collect();
    assert_eq!(gauge.len(), 6);
    assert!(gauge.iter().all(|&g| g <= 1e-6));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "completed");
    assert_eq!(manifest["config"]["grid"]["L"], 40.0);
}

#[test]
fn runtime_abort_flushes_and_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(dir.path(), &format!("[time]\ndt = 0.01\n[output]\ndir = {}\n", out_dir.display()));
    let out = gaugeflow(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "aborted");
    assert!(manifest["error"].as_str().unwrap().contains("stability"));
    assert!(out_dir.join("diagnostics.csv").exists());
}
