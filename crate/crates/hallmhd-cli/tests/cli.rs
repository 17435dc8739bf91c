//! End-to-end tests of the `hallmhd` binary: exit codes, CSV shapes,
//! snapshot round trips, and run-to-run determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hallmhd"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn hallmhd");
    assert!(
        out.status.success(),
        "hallmhd {args:?} failed: status {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn small_config(out_dir: &Path, t_end: f64) -> String {
    format!(
        r#"
[system]
kind = "A"
nu = 1.0
eta = 1.0
epsilon = 1.0

[grid]
dim = 2
n = 16

[initial]
kind = "random"
seed = 11
band_limit = 4
h1_norm = 1.0

[stepper]
dt = 0.01
t_end = {t_end}

[output]
dir = "{}"
cadence = 1

[[criteria]]
quantity = "grad_b3"
p = 4.0

[[criteria]]
quantity = "j3"
p = 4.0
"#,
        out_dir.display()
    )
}

#[test]
fn verify_zero_trials_is_a_vacuous_pass() {
    let out = run_ok(&[
        "verify",
        "--suite",
        "identities2d",
        "--trials",
        "0",
        "--seed",
        "1",
        "--n",
        "16",
    ]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.trim_end(), "suite,identity,seed,value,normalizer,tolerance,pass");
}

#[test]
fn verify_small_suites_pass_with_exit_zero() {
    for suite in ["identities2d", "divcurl", "residuals"] {
        let out = run_ok(&[
            "verify", "--suite", suite, "--trials", "3", "--seed", "1", "--n", "32",
        ]);
        let stdout = String::from_utf8(out.stdout).unwrap();
        let rows: Vec<&str> = stdout.lines().skip(1).collect();
        assert!(!rows.is_empty());
        for row in rows {
            assert!(row.ends_with(",true"), "row failed: {row}");
        }
    }
    run_ok(&[
        "verify", "--suite", "identities3d", "--trials", "2", "--seed", "1", "--n", "16",
    ]);
}

#[test]
fn verify_rejects_bad_usage_with_exit_two() {
    let out = bin()
        .args(["verify", "--suite", "bogus", "--trials", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_with_zero_t_end_emits_initial_snapshot_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &small_config(&out_dir, 0.0));
    let out = run_ok(&["run", "--config", cfg.to_str().unwrap()]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("status completed"), "{stdout}");

    let ts = std::fs::read_to_string(out_dir.join("timeseries.csv")).unwrap();
    let data_rows: Vec<&str> = ts.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(data_rows.len(), 1, "expected only the t = 0 row");

    let snap = out_dir.join("final.snap");
    assert!(snap.exists());
    let loaded = hallmhd_snapshot_time(&snap);
    assert_eq!(loaded, 0.0);
}

fn hallmhd_snapshot_time(path: &Path) -> f64 {
    let bytes = std::fs::read(path).unwrap();
    f64::from_le_bytes(bytes[32..40].try_into().unwrap())
}

#[test]
fn run_is_deterministic_and_restartable() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let cfg_a = write_config(tmp.path(), &small_config(&out_a, 0.05));
    run_ok(&["run", "--config", cfg_a.to_str().unwrap()]);
    // same config, fresh output directory, via the --out-dir override
    run_ok(&[
        "run",
        "--config",
        cfg_a.to_str().unwrap(),
        "--out-dir",
        out_b.to_str().unwrap(),
    ]);

    let ts_a = std::fs::read(out_a.join("timeseries.csv")).unwrap();
    let ts_b = std::fs::read(out_b.join("timeseries.csv")).unwrap();
    assert_eq!(ts_a, ts_b, "time series differ between identical runs");
    let snap_a = std::fs::read(out_a.join("final.snap")).unwrap();
    let snap_b = std::fs::read(out_b.join("final.snap")).unwrap();
    assert_eq!(snap_a, snap_b, "snapshots differ between identical runs");

    // restart from the snapshot
    let restart_dir = tmp.path().join("c");
    let restart_cfg = format!(
        r#"
[system]
kind = "A"
nu = 1.0
eta = 1.0
epsilon = 1.0

[grid]
dim = 2
n = 16

[initial]
kind = "snapshot"
path = "{}"

[stepper]
dt = 0.01
t_end = 0.1

[output]
dir = "{}"
"#,
        out_a.join("final.snap").display(),
        restart_dir.display()
    );
    let cfg_c = tmp.path().join("restart.toml");
    std::fs::write(&cfg_c, restart_cfg).unwrap();
    let out = run_ok(&["run", "--config", cfg_c.to_str().unwrap()]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("status completed"));
    let t = hallmhd_snapshot_time(&restart_dir.join("final.snap"));
    assert!((t - 0.1).abs() < 1e-12, "restart advanced to t = {t}");
}

#[test]
fn malformed_config_exits_nonzero_without_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let bad = small_config(&out_dir, 0.1).replace("kind = \"A\"", "kind = \"Z\"");
    let cfg = write_config(tmp.path(), &bad);
    let out = bin()
        .args(["run", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("system.kind"),
        "unexpected stderr"
    );
    assert!(!out_dir.exists(), "partial outputs were created");
}

#[test]
fn blowup_guard_trips_and_exit_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg_text = small_config(&out_dir, 0.1).replace(
        "[stepper]\ndt = 0.01\nt_end = 0.1",
        "[stepper]\ndt = 0.01\nt_end = 0.1\nblowup_guard = 1e-9",
    );
    let cfg = write_config(tmp.path(), &cfg_text);
    let out = bin()
        .args(["run", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("blowup_detected"), "{stdout}");
}

#[test]
fn analyze_hall2d_sum_matches_direct() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &small_config(&out_dir, 0.05));
    run_ok(&["run", "--config", cfg.to_str().unwrap()]);
    let snap = out_dir.join("final.snap");
    let out = run_ok(&["analyze", "--snapshot", snap.to_str().unwrap(), "--what", "hall2d"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut sum = None;
    let mut direct = None;
    let mut max_term = 0.0f64;
    for line in stdout.lines().skip(1) {
        let (name, value) = line.split_once(',').unwrap();
        let v: f64 = value.parse().unwrap();
        match name {
            "sum" => sum = Some(v),
            "direct" => direct = Some(v),
            _ => max_term = max_term.max(v.abs()),
        }
    }
    let (sum, direct) = (sum.unwrap(), direct.unwrap());
    let scale = max_term.max(direct.abs()).max(1e-300);
    assert!(
        (sum - direct).abs() <= 1e-9 * scale,
        "sum {sum} direct {direct} scale {scale}"
    );

    // aux and sample views also work on the same snapshot
    let aux = run_ok(&["analyze", "--snapshot", snap.to_str().unwrap(), "--what", "aux"]);
    assert!(String::from_utf8(aux.stdout).unwrap().contains("j3_reconstruction_defect"));
    let rec = run_ok(&["analyze", "--snapshot", snap.to_str().unwrap(), "--what", "sample"]);
    assert!(String::from_utf8(rec.stdout).unwrap().contains("grad_b3_p4_sample"));
}

#[test]
fn analyze_zero_state_gives_zero_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg_text = small_config(&out_dir, 0.0).replace("h1_norm = 1.0", "amplitude = 0.0");
    let cfg = write_config(tmp.path(), &cfg_text);
    run_ok(&["run", "--config", cfg.to_str().unwrap()]);
    let out = run_ok(&[
        "analyze",
        "--snapshot",
        out_dir.join("final.snap").to_str().unwrap(),
        "--what",
        "hall2d",
    ]);
    for line in String::from_utf8(out.stdout).unwrap().lines().skip(1) {
        let (_, value) = line.split_once(',').unwrap();
        assert_eq!(value.parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn analyze_rejects_truncated_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &small_config(&out_dir, 0.0));
    run_ok(&["run", "--config", cfg.to_str().unwrap()]);
    let snap = out_dir.join("final.snap");
    let bytes = std::fs::read(&snap).unwrap();
    std::fs::write(&snap, &bytes[..bytes.len() / 2]).unwrap();
    let out = bin()
        .args(["analyze", "--snapshot", snap.to_str().unwrap(), "--what", "hall2d"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("size mismatch"));
}
