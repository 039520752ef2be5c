use gapcorr::scenario::{emit_plot, run_correlations, run_preset, run_solve, run_sweep, RunConfig, SweepAxis};
use std::fs;
use std::path::Path;

fn quick(dir: &Path, omega_0: f64) -> RunConfig {
    let mut cfg = RunConfig::for_emitter(omega_0);
    cfg.output_dir = dir.to_path_buf();
    cfg.solver.t_max = 5.0;
    cfg.output.plots = false;
    cfg
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_correlations(&quick(a.path(), 0.1)).unwrap();
    run_correlations(&quick(b.path(), 0.1)).unwrap();
    for f in ["trajectory.csv", "correlations.csv", "resolved.toml"] {
        let (x, y) = (fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        if f == "resolved.toml" {
            // only the output directory differs
            let strip = |s: Vec<u8>| String::from_utf8(s).unwrap().lines().filter(|l| !l.starts_with("output_dir")).collect::<Vec<_>>().join("\n");
            assert_eq!(strip(x), strip(y));
        } else {
            assert_eq!(x, y, "{f}");
        }
    }
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(dir.path(), 2.0);
    cfg.reservoir.eta = 0.15;
    cfg.output.stride = 3;
    run_solve(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("resolved.toml")).unwrap();
    let back = RunConfig::from_toml(&text).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn stride_thins_the_written_series() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(dir.path(), 0.1);
    cfg.output.stride = 50;
    run_solve(&cfg).unwrap();
    let (header, rows) = read_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(header[0], "t");
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn plotting_an_empty_csv_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    fs::write(&csv, "t,re_b,im_b,pop,omega_shift,gamma_rate\n").unwrap();
    let svg = dir.path().join("empty.svg");
    assert!(emit_plot(&csv, None, &svg).is_err());
    assert!(!svg.exists());
}

#[test]
fn uncoupled_sweep_keeps_the_emitter_excited() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(dir.path(), 0.1);
    run_sweep(&cfg, SweepAxis::Eta, &[0.0, 0.2]).unwrap();
    let (header, rows) = read_rows(&dir.path().join("sweep_summary.csv"));
    let pop = header.iter().position(|h| h == "pop_plateau").unwrap();
    assert_eq!(rows[0][1], "ok");
    assert!((rows[0][pop].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!(rows[1][pop].parse::<f64>().unwrap() < 1.0);
    assert!(dir.path().join("sweep_eta_001/correlations.csv").exists());
}

#[test]
fn failed_sweep_points_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(dir.path(), 0.1);
    run_sweep(&cfg, SweepAxis::Alpha, &[0.5, 1.5]).unwrap();
    let (_, rows) = read_rows(&dir.path().join("sweep_summary.csv"));
    assert_eq!(rows[0][1], "ok");
    assert_eq!(rows[1][1], "error");
}

#[test]
fn bound_state_preset_curves_cross_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(dir.path(), 0.1);
    run_preset("fig4a", &cfg).unwrap();
    let (header, rows) = read_rows(&dir.path().join("fig4a_curves.csv"));
    assert_eq!(header.len(), 6);
    for col in 1..header.len() {
        let vals: Vec<f64> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
        assert!(vals[0] > 0.0 && *vals.last().unwrap() < 0.0, "{}", header[col]);
    }
    let (_, bound) = read_rows(&dir.path().join("fig4a_bound_states.csv"));
    assert_eq!(bound.len(), 5);
}

#[test]
fn unknown_preset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_preset("fig9", &quick(dir.path(), 0.1)).unwrap_err();
    assert!(err.is_config_error());
}

#[test]
fn config_errors_are_caught_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let mut cfg = quick(&out, 0.1);
    cfg.reservoir.eta = -1.0;
    assert!(run_solve(&cfg).unwrap_err().is_config_error());
    assert!(!out.exists());
}
