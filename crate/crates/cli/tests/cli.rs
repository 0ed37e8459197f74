use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_phs-forge");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn forge(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("PHS_FORGE_OUT_DIR", dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn energy_column(path: &Path, col: usize) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn list_models_names_every_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(dir.path(), &["list-models"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in phs_core::model::builtin_names() {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    let kr = text.lines().find(|l| l.starts_with("kirchhoff_rayleigh")).unwrap();
    assert!(kr.contains("symbolic"));
}

#[test]
fn help_documents_grammar_version() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["build", "--help"]] {
        let o = forge(dir.path(), args);
        assert!(o.status.success());
        let text = stdout(&o);
        assert!(text.contains("grammar version 1"), "{args:?}");
        assert!(text.contains("PHS_FORGE_OUT_DIR"), "{args:?}");
    }
}

#[test]
fn build_writes_summary_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(dir.path(), &["build", "--builtin", "timoshenko", "--param", "E=2", "--param", "rho=3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("timoshenko: n=2 m=2 d=2 N=1 l=1"));
    assert!(text.contains("[ -1  d1 ]"));
    let doc = json(&dir.path().join("timoshenko.json"));
    assert_eq!(doc["format"], "phs-forge-system");
    assert_eq!(doc["params"]["E"], "2/1");
    assert_eq!(doc["mass"]["entries"][1][1], "3/1");
}

#[test]
fn build_to_stdout_keeps_stdout_pure_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(dir.path(), &["build", "--builtin", "truss", "--out", "-"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["model"], "truss");
    assert!(stderr(&o).contains("M ="));
}

#[test]
fn broken_model_file_exits_two_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(dir.path(), &["build", "--file", fixture("broken.phs").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("failed validation"));
    assert!(err.contains("FAIL  lambda1-columns"));
    assert!(!dir.path().join("broken.json").exists());
}

#[test]
fn model_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let a = forge(dir.path(), &["build", "--file", fixture("timoshenko.phs").to_str().unwrap(), "--out", "a.json"]);
    let b = forge(dir.path(), &["build", "--builtin", "timoshenko", "--out", "b.json"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn invalid_sources_and_parameters_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["build", "--builtin", "nope"],
        &["build", "--builtin", "truss", "--param", "E=abc"],
        &["build", "--builtin", "truss", "--param", "Q=1"],
        &["build", "--builtin", "truss", "--param", "E=-1"],
        &["build", "--builtin", "plate", "--file", "x.phs"],
        &["build"],
        &["verify", "--model", "nope"],
        &["simulate", "--model", "truss", "--cells", "2", "--dt", "0.1", "--steps", "1"],
        &["simulate", "--model", "truss", "--cells", "8", "--dt", "0", "--steps", "1"],
        &["simulate", "--model", "truss", "--cells", "8", "--dt", "0.1", "--steps", "1", "--bc", "left=glue"],
        &["simulate", "--model", "truss", "--cells", "8", "--dt", "0.1", "--steps", "1", "--init", "warm"],
        &["simulate", "--model", "euler_bernoulli", "--cells", "8", "--dt", "0.1", "--steps", "1", "--input", "right=1"],
    ];
    for args in cases {
        let o = forge(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn verify_torsion_includes_polar_moment_reduction() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(dir.path(), &["verify", "--model", "torsion", "--json", "t.json"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("pass  limits/torsion-two-strain"));
    let doc = json(&dir.path().join("t.json"));
    let ids: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"limits/torsion-two-strain"));
    assert!(ids.contains(&"spd/torsion"));
    assert!(ids.contains(&"energy/torsion"));
    assert_eq!(ids.iter().filter(|i| i.starts_with("lemma1/torsion/")).count(), 20);
}

#[test]
fn verify_file_model_skips_builtin_only_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(dir.path(), &["verify", "--file", fixture("timoshenko.phs").to_str().unwrap(), "--trials", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("skip  limits/*"));
    assert!(text.contains("0 failed, 2 skipped"));
}

#[test]
fn verify_json_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, out: &str| {
        let o = forge(dir.path(), &["verify", "--model", "timoshenko", "--seed", seed, "--json", out, "--trials", "4"]);
        assert!(o.status.success());
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("7", "a.json");
    assert_eq!(a, run("7", "b.json"));
    let c = String::from_utf8(run("8", "c.json")).unwrap();
    assert!(c.contains("\"seed\": 8"));
}

#[test]
fn export_writes_csv_and_model_text() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(
        dir.path(),
        &["export", "--builtin", "timoshenko", "--csv", "csv", "--model-text", "t.phs", "--json", "t.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["M.csv", "M_inv.csv", "K.csv", "F_P0.csv", "F_P1_1.csv", "Q_n1.csv", "Bd.csv"] {
        assert!(dir.path().join("csv").join(f).exists(), "{f}");
    }
    let text = std::fs::read_to_string(dir.path().join("t.phs")).unwrap();
    assert!(text.starts_with("phs-model 1\n"));
    assert_eq!(json(&dir.path().join("t.json"))["model"], "timoshenko");

    let plain = forge(dir.path(), &["export", "--builtin", "truss"]);
    let doc: Value = serde_json::from_slice(&plain.stdout).unwrap();
    assert_eq!(doc["dims"]["n"], 1);
}

#[test]
fn simulate_refuses_symbolic_only_models() {
    let dir = tempfile::tempdir().unwrap();
    for (model, cells) in [("kirchhoff_rayleigh", "4,4"), ("elasticity3d", "4,4,4")] {
        let o = forge(dir.path(), &["simulate", "--model", model, "--cells", cells, "--dt", "0.1", "--steps", "1"]);
        assert_eq!(o.status.code(), Some(3));
        assert!(stderr(&o).contains("symbolically"), "{}", stderr(&o));
    }
}

#[test]
fn closed_string_run_reports_small_drift() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(
        dir.path(),
        &[
            "simulate", "--model", "string", "--cells", "64", "--dt", "1e-3", "--steps", "2000", "--bc",
            "left=clamped,right=clamped", "--energy", "e.csv", "--out", "traj.csv", "--record-every", "500",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let drift: f64 = line.split("drift=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(drift <= 1e-10, "{line}");
    let h = energy_column(&dir.path().join("e.csv"), 2);
    assert_eq!(h.len(), 2001);
    assert!(((h[2000] - h[0]) / h[0]).abs() <= 1e-10);

    let traj = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next(), Some("step,time,field,i,j,x,y,value"));
    // 5 snapshots of 63 interior nodes and 64 cells.
    assert_eq!(lines.count(), 5 * (63 + 64));
}

#[test]
fn timoshenko_traction_residuals_are_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(
        dir.path(),
        &[
            "simulate", "--model", "timoshenko", "--cells", "32", "--dt", "1e-2", "--steps", "300", "--bc", "left=clamped",
            "--input", "right=0.5,1@sin:2", "--init", "zero", "--energy", "e.csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let e = dir.path().join("e.csv");
    let residual = energy_column(&e, 4);
    let power = energy_column(&e, 3);
    assert!(residual.iter().all(|r| r.abs() <= 1e-10));
    assert!(power.iter().any(|p| p.abs() > 1e-3));
}

#[test]
fn simulation_artifacts_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let e = format!("e{tag}.csv");
        let t = format!("t{tag}.csv");
        let o = forge(
            dir.path(),
            &[
                "simulate", "--model", "mindlin_plate", "--cells", "4,5", "--dt", "1e-2", "--steps", "20", "--init",
                "random:9", "--record-every", "5", "--energy", &e, "--out", &t,
            ],
        );
        assert!(o.status.success());
        (std::fs::read(dir.path().join(e)).unwrap(), std::fs::read(dir.path().join(t)).unwrap(), o.stdout)
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn explicit_out_dir_flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let other = tempfile::tempdir().unwrap();
    let o = forge(
        dir.path(),
        &["--out-dir", other.path().to_str().unwrap(), "build", "--builtin", "string"],
    );
    assert!(o.status.success());
    assert!(other.path().join("string.json").exists());
    assert!(!dir.path().join("string.json").exists());
}
