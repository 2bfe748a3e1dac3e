use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn slitspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slitspec"))
        .args(args)
        .env_remove("SLITSPEC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value_after(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line.split('=').nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn half_equator_eigenvalue_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("eig");
    let o = slitspec(&["eig-sphere", "--beta", "1.5707963", "--level", "4", "--out", prefix.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!((value_after(&text, "lambda1") - 0.75).abs() < 0.02);
    assert!(value_after(&text, "cracktip_similarity") >= 0.99);

    let manifest_path = dir.path().join("eig.manifest.json");
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["outputs"], serde_json::json!(["eig.csv"]));
    assert_eq!(manifest["command"], "eig-sphere");
    assert_eq!(manifest["input_hash"].as_str().unwrap().len(), 64);
    assert!(dir.path().join("eig.csv").exists());

    let r = slitspec(&["replay", manifest_path.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", stdout(&r));
    assert!(stdout(&r).contains("PASS csv_matches"));
}

#[test]
fn uncut_sphere() {
    let o = slitspec(&["eig-sphere", "--beta", "0", "--level", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((value_after(&stdout(&o), "lambda1") - 2.0).abs() < 0.02);
}

#[test]
fn usage_errors_exit_two() {
    let o = slitspec(&["eig-sphere", "--level", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = slitspec(&["eig-sphere", "--level", "4", "--json-errors"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "usage");
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn invalid_input_reports_json() {
    let o = slitspec(&["eig-sphere", "--beta", "4", "--json-errors"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "invalid_crack");
}

#[test]
fn failed_check_exits_one() {
    let o = slitspec(&["circle", "--segments", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL closed_form_0.5pct"));
    let o = slitspec(&["circle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((value_after(&stdout(&o), "lambda1") - 0.25).abs() < 0.25 * 0.005);
}

#[test]
fn cracktip_phi_columns_are_constant() {
    let dir = tempfile::tempdir().unwrap();
    for (dim, target) in [("3", PI), ("2", 1.0)] {
        let prefix = dir.path().join(format!("mono{dim}"));
        let o = slitspec(&["monotonicity", "--data", "cracktip", "--dim", dim, "--out", prefix.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let phi = csv_column(&dir.path().join(format!("mono{dim}.csv")), "phi");
        assert!(phi.len() > 20);
        assert!(phi.iter().all(|p| (p - target).abs() <= 1e-6));
    }
}

#[test]
fn perturbed_field_is_monotone() {
    let o = slitspec(&["monotonicity", "--data", "perturbed", "--level", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS phi_monotone") && text.contains("PASS derivative_inequality"));
}

#[test]
fn convergence_deltas_shrink() {
    let o = slitspec(&["convergence", "--target", "lambda1_half_equator", "--levels", "3..6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS deltas_shrink"));
}

#[test]
fn seed_from_environment_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, extra: &[&str]| -> u64 {
        let prefix = dir.path().join("c");
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_slitspec"));
        cmd.args(["circle", "--out", prefix.to_str().unwrap()]).args(extra).env_remove("SLITSPEC_SEED");
        if let Some(v) = env {
            cmd.env("SLITSPEC_SEED", v);
        }
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.manifest.json")).unwrap()).unwrap();
        m["seed"].as_u64().unwrap()
    };
    assert_eq!(run(Some("11"), &[]), 11);
    assert_eq!(run(Some("11"), &["--seed", "5"]), 5);
    let o = Command::new(env!("CARGO_BIN_EXE_slitspec")).arg("circle").env("SLITSPEC_SEED", "x").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tampered_manifest_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("c");
    assert_eq!(slitspec(&["circle", "--out", prefix.to_str().unwrap()]).status.code(), Some(0));
    let path = dir.path().join("c.manifest.json");
    let text = std::fs::read_to_string(&path).unwrap().replace("\"segments\": 512", "\"segments\": 64");
    std::fs::write(&path, text).unwrap();
    let o = slitspec(&["replay", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
