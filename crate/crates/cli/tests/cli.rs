use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gapcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapcorr")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "[emitter]\nomega_0 = 0.1\n\n[solver]\nt_max = 4.0\n\n[output]\nstride = 20\nplots = false\n";

#[test]
fn unknown_config_key_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[emitter]\nomega_0 = 0.1\nomgea = 2\n");
    let out = gapcorr(&["solve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("omgea"));
}

#[test]
fn missing_config_and_bad_flags_exit_with_1() {
    assert_eq!(gapcorr(&["solve", "--config", "/nonexistent/run.toml"]).status.code(), Some(1));
    assert_eq!(gapcorr(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(gapcorr(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_preset_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let code = gapcorr(&["preset", "fig7", "--out", out.to_str().unwrap()]).status.code();
    assert_eq!(code, Some(1));
}

#[test]
fn resolved_config_reproduces_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SMALL);
    let first = dir.path().join("first");
    let out = gapcorr(&["correlations", "--config", &cfg, "--out", first.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let second = dir.path().join("second");
    let resolved = first.join("resolved.toml");
    let out = gapcorr(&["correlations", "--config", resolved.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(out.status.success());
    for f in ["trajectory.csv", "correlations.csv"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn oracle_disagreement_exits_with_2_and_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    // a step this coarse cannot follow the decay at ω₀ = 2
    let cfg = write_config(dir.path(), "coarse.toml", "[emitter]\nomega_0 = 2.0\n\n[solver]\ndt = 0.25\nt_max = 20.0\n");
    let out_dir = dir.path().join("o");
    let out = gapcorr(&["verify", "--config", &cfg, "--oracle-modes", "1000", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let diag = fs::read_to_string(out_dir.join("diagnostic.txt")).unwrap();
    assert!(diag.contains("mode oracle"));
    assert!(diag.contains("omega_0 = 2.0"));
}

#[test]
fn verify_passes_with_default_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.toml", "[emitter]\nomega_0 = 1.0\n\n[solver]\nt_max = 10.0\n");
    let out_dir = dir.path().join("o");
    let out = gapcorr(&["verify", "--config", &cfg, "--oracle-modes", "600", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("verify.csv").exists());
}

#[test]
fn plotting_an_empty_csv_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    fs::write(&csv, "t,re_b,im_b,pop,omega_shift,gamma_rate\n").unwrap();
    assert_eq!(gapcorr(&["plot", csv.to_str().unwrap()]).status.code(), Some(1));
    assert!(!dir.path().join("t.svg").exists());
}

#[test]
fn plot_renders_a_solver_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SMALL);
    let out_dir = dir.path().join("o");
    assert!(gapcorr(&["solve", "--config", &cfg, "--out", out_dir.to_str().unwrap()]).status.success());
    let csv = out_dir.join("trajectory.csv");
    assert!(gapcorr(&["plot", csv.to_str().unwrap()]).status.success());
    let svg = fs::read_to_string(out_dir.join("trajectory.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn bound_state_preset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let out = gapcorr(&["preset", "fig4a", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out_dir.join("fig4a_curves.csv").exists());
    assert!(out_dir.join("fig4a_bound_states.csv").exists());
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SMALL);
    let out_dir = dir.path().join("o");
    let out = gapcorr(&["sweep", "--config", &cfg, "--axis", "omega_0", "--values", "0.1,2", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out_dir.join("sweep_omega_0_000/trajectory.csv").exists());
    assert!(out_dir.join("sweep_omega_0_001/trajectory.csv").exists());
    let summary = fs::read_to_string(out_dir.join("sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert_eq!(gapcorr(&["sweep", "--config", &cfg, "--axis", "kappa", "--values", "1"]).status.code(), Some(1));
}
