//! End-to-end tests of the `geodev` binary: artifact schemas, exit codes,
//! and byte-level determinism of every command under a fixed seed.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geodev"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

const SMALL_CONFIG: &str = r#"{
  "common": { "seed": 42 },
  "well": { "sim": { "n_steps": 40, "ensemble": 6 } },
  "duffing": { "sim": { "n_steps": 40, "ensemble": 4, "upsilon": 10000.0 } },
  "optimize": {
    "sim": { "dt": 0.5, "ensemble": 3, "upsilon": 1000000.0 },
    "beta0": 10.0, "eu_beta0": 10.0, "decay": 0.05
  }
}"#;

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let idx = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[idx]).collect()
}

#[test]
fn well_writes_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    let out = dir.path().join("out");
    let result = run("well", &cfg, &out, &[]);
    assert!(result.status.success(), "{result:?}");
    for name in ["well_geometric.csv", "well_euclidean.csv", "well_summary.json", "manifest.json"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let (header, rows) = read_csv(&out.join("well_geometric.csv"));
    assert_eq!(header, ["t", "member", "x1", "x2"]);
    assert_eq!(rows.len(), 6 * 41);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["command"], "well");
    for artifact in manifest["artifacts"].as_array().unwrap() {
        assert!(out.join(artifact.as_str().unwrap()).is_file());
    }
}

#[test]
fn resolved_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    let out = dir.path().join("out");
    assert!(run("well", &cfg, &out, &[]).status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let resolved = manifest["resolved_config"].clone();
    // parse -> serialize -> parse is the identity on the materialized config
    let text = serde_json::to_string(&resolved).unwrap();
    let reparsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(resolved, reparsed);
    assert_eq!(resolved["sim"]["n_steps"], 40);
    assert_eq!(resolved["lambda"], serde_json::json!([1.0, 2.0]));
}

/// Acceptance criterion 8: with a fixed seed every command writes
/// byte-identical artifacts across two runs. `manifest.json` is excluded
/// because it records the wall-clock duration.
#[test]
fn all_commands_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    for cmd in ["well", "duffing", "optimize", "check"] {
        let out_a = dir.path().join(format!("{cmd}_a"));
        let out_b = dir.path().join(format!("{cmd}_b"));
        for out in [&out_a, &out_b] {
            let result = run(cmd, &cfg, out, &[]);
            assert!(result.status.success(), "{cmd}: {result:?}");
        }
        let mut names: Vec<String> = std::fs::read_dir(&out_a)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert!(names.len() > 1, "{cmd} wrote no artifacts");
        for name in names {
            if name == "manifest.json" {
                continue;
            }
            let a = std::fs::read(out_a.join(&name)).unwrap();
            let b = std::fs::read(out_b.join(&name)).unwrap();
            assert_eq!(a, b, "{cmd}/{name} differs between runs");
        }
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert!(run("well", &cfg, &out_a, &[]).status.success());
    assert!(run("well", &cfg, &out_b, &["--seed", "43"]).status.success());
    let a = std::fs::read(out_a.join("well_geometric.csv")).unwrap();
    let b = std::fs::read(out_b.join("well_geometric.csv")).unwrap();
    assert_ne!(a, b);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_b.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 43);
}

#[test]
fn scheme_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    let out = dir.path().join("out");
    assert!(run("well", &cfg, &out, &["--scheme", "euclidean"]).status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["resolved_config"]["sim"]["scheme"], "euclidean");
    // with both runs Euclidean and shared noise, the two CSVs coincide
    let a = std::fs::read(out.join("well_geometric.csv")).unwrap();
    let b = std::fs::read(out.join("well_euclidean.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    // negative dt: message names the field
    let cfg = write_config(dir.path(), r#"{ "well": { "sim": { "dt": -0.5 } } }"#);
    let result = run("well", &cfg, &out, &[]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("dt"));

    // missing file
    let result = run("well", &dir.path().join("nope.json"), &out, &[]);
    assert_eq!(result.status.code(), Some(2));

    // unknown key: message names the typo
    let cfg = write_config(dir.path(), r#"{ "well": { "lambada": [1.0, 2.0] } }"#);
    let result = run("well", &cfg, &out, &[]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("lambada"));

    // invalid JSON
    let cfg = write_config(dir.path(), "{ not json");
    let result = run("duffing", &cfg, &out, &[]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn fully_diverged_run_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // an absurd step size overflows the well energy for every member
    let cfg = write_config(
        dir.path(),
        r#"{ "well": { "sim": { "dt": 10000.0, "n_steps": 5, "ensemble": 2 } } }"#,
    );
    let out = dir.path().join("out");
    let result = run("well", &cfg, &out, &[]);
    assert_eq!(result.status.code(), Some(3), "{result:?}");
}

#[test]
fn duffing_theory_column_matches_formula() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    let out = dir.path().join("out");
    assert!(run("duffing", &cfg, &out, &[]).status.success());
    let (header, rows) = read_csv(&out.join("duffing_energy.csv"));
    let t = column(&header, &rows, "t");
    let z = column(&header, &rows, "theory_Z");
    for (t, z) in t.iter().zip(&z) {
        let expected = 5.0125 + 0.5 * 0.05 * 0.05 * t;
        assert!((z - expected).abs() <= 1e-12, "Z {z} vs {expected} at t={t}");
    }
}

#[test]
fn noiseless_duffing_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "duffing": { "sigma": 0.0, "sim": { "n_steps": 1000, "ensemble": 1, "upsilon": 10000.0 } } }"#,
    );
    let out = dir.path().join("out");
    assert!(run("duffing", &cfg, &out, &[]).status.success());
    let (header, rows) = read_csv(&out.join("duffing_energy.csv"));
    for rmse in column(&header, &rows, "rmse") {
        assert!(rmse < 0.01 * 5.0125, "rmse {rmse}");
    }
}

#[test]
fn optimizer_history_obeys_schedule_and_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    let out = dir.path().join("out");
    assert!(run("optimize", &cfg, &out, &[]).status.success());
    for name in ["opt_history.csv", "opt_history_euclidean.csv"] {
        let (header, rows) = read_csv(&out.join(name));
        let beta = column(&header, &rows, "beta");
        let incumbent = column(&header, &rows, "incumbent_f");
        let decay = 0.05;
        assert_eq!(beta[0], beta[1]);
        for k in 1..beta.len() - 1 {
            let expected = beta[k] / (decay * k as f64).exp();
            assert!(
                (beta[k + 1] - expected).abs() <= 1e-12 * expected,
                "{name}: beta[{}] {} vs {expected}",
                k + 1,
                beta[k + 1]
            );
        }
        for w in incumbent.windows(2) {
            assert!(w[1] <= w[0], "{name}: incumbent increased");
        }
    }
    let best: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("opt_best.json")).unwrap()).unwrap();
    assert_eq!(best["geometric"]["best_point"].as_array().unwrap().len(), 2);
    assert!(best["geometric"]["best_value"].is_number());
}

#[test]
fn check_passes_with_full_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = bin().arg("check").arg("--out").arg(&out).output().unwrap();
    assert!(result.status.success(), "{result:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("check_report.json")).unwrap())
            .unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 12, "only {} checks", checks.len());
    for c in checks {
        assert_eq!(c["passed"], true, "{} failed", c["name"]);
    }
}

#[test]
fn thread_cap_env_is_honored_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert!(run("well", &cfg, &out_a, &[]).status.success());
    let result = bin()
        .arg("well")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_b)
        .env("GEODEV_THREADS", "1")
        .output()
        .unwrap();
    assert!(result.status.success());
    // thread count must not affect results
    assert_eq!(
        std::fs::read(out_a.join("well_geometric.csv")).unwrap(),
        std::fs::read(out_b.join("well_geometric.csv")).unwrap()
    );
    let result = bin()
        .arg("well")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("c"))
        .env("GEODEV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
}
