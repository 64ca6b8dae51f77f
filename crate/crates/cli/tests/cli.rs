use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rough_laplace::laplace::kappa_ladder;
use rough_laplace_cli::{ExperimentConfig, ExperimentKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rough-laplace"))
}

fn run_ok(args: &[&str]) -> PathBuf {
    let out = bin().args(args).output().expect("spawn");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    PathBuf::from(String::from_utf8(out.stdout).unwrap().trim())
}

fn run_err(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn");
    assert!(!out.status.success());
    out
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn kappa_csv_matches_ladder() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "k.json", r#"{"hurst": 0.3, "count": 8}"#);
    let dir = run_ok(&["kappa", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    let rows = read_csv(&dir.join("kappa.csv"));
    let ladder = kappa_ladder(0.3, 8).unwrap();
    assert_eq!(rows.len(), ladder.entries.len());
    for (row, e) in rows.iter().zip(&ladder.entries) {
        let v: f64 = row[1].parse().unwrap();
        assert_eq!(v.to_bits(), e.value.to_bits());
        assert_eq!(row[2].parse::<u32>().unwrap(), e.n1);
        assert_eq!(row[3].parse::<u32>().unwrap(), e.n2);
    }
}

#[test]
fn pvar_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_ok(&["pvar", "--out", tmp.path().to_str().unwrap()]);
    let rows = read_csv(&dir.join("pvar.csv"));
    assert_eq!(rows.len(), 16 * 3);
    for row in rows {
        let diff: f64 = row[4].parse().unwrap();
        assert!(diff.abs() < 1e-12, "{row:?}");
    }
}

#[test]
fn artifacts_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "l.json",
        r#"{"kind": "laplace", "grid_steps": 32, "truncation": 4, "samples": 200, "eps_list": [0.5, 0.3, 0.2]}"#,
    );
    for kind in ["simulate", "laplace"] {
        let a = tmp.path().join(format!("{kind}-a"));
        let b = tmp.path().join(format!("{kind}-b"));
        let mut args = vec![kind, "--seed", "11"];
        if kind == "laplace" {
            args.extend(["--config", &cfg]);
        }
        let da = run_ok(&[&args[..], &["--workers", "1", "--out", a.to_str().unwrap()]].concat());
        let db = run_ok(&[&args[..], &["--workers", "3", "--out", b.to_str().unwrap()]].concat());
        assert_eq!(da.file_name(), db.file_name());
        let mut names: Vec<_> = fs::read_dir(&da).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names {
            let (x, y) = (fs::read(da.join(&name)).unwrap(), fs::read(db.join(&name)).unwrap());
            assert!(x == y, "{kind}: {name:?} differs between worker counts");
        }
    }
}

#[test]
fn invalid_config_lists_every_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", r#"{"hurst": 0.6, "grid_steps": 1, "samples": 1, "y0": [1.0, 2.0, 3.0]}"#);
    let out = run_err(&["rde", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("4 problems"), "{err}");
    assert!(err.contains("grid_steps"), "{err}");
    assert!(err.contains("samples"), "{err}");
    assert!(err.contains("y0"), "{err}");
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 1, "nothing but the config should be written");
}

#[test]
fn unknown_fields_and_kind_mismatch_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = write_config(tmp.path(), "typo.json", r#"{"hurts": 0.4}"#);
    let out = run_err(&["kappa", "--config", &typo]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hurts"));
    let other = write_config(tmp.path(), "other.json", r#"{"kind": "lift"}"#);
    let out = run_err(&["kappa", "--config", &other]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("`lift`"));
}

#[test]
fn manifest_records_completed_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_ok(&["lift", "--out", tmp.path().to_str().unwrap()]);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "complete");
    let hash = m["config_hash"].as_str().unwrap();
    assert!(dir.file_name().unwrap().to_str().unwrap().ends_with(&hash[..16]));
    for a in m["artifacts"].as_array().unwrap() {
        assert!(dir.join(a.as_str().unwrap()).exists(), "{a}");
    }
    assert!(dir.join("SCHEMA.md").exists());
}

#[test]
fn config_hash_tracks_seed() {
    let resolve = |seed| {
        let mut c = ExperimentConfig { kind: Some(ExperimentKind::Simulate), ..Default::default() };
        c.seed = Some(seed);
        c.resolve().unwrap()
    };
    assert_eq!(resolve(1).hash(), resolve(1).hash());
    assert_ne!(resolve(1).hash(), resolve(2).hash());
}

#[test]
fn schema_covers_every_kind() {
    let out = bin().arg("schema").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for k in ExperimentKind::ALL {
        assert!(text.contains(&k.to_string()), "{k}");
    }
}
