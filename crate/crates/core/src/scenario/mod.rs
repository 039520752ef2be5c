//! Configured runs, figure presets and parameter sweeps, with CSV and SVG
//! output.
//!
//! Every run writes `resolved.toml` into its output directory; feeding that
//! file back reproduces the run's CSV files byte for byte.

mod config;
pub mod output;
pub mod plot;

pub use config::{EmitterSection, InitialSection, OutputSection, RunConfig};
pub use plot::{emit_plot, render_svg, PlotKind};

use crate::amplitude::{solve_amplitude, solve_with_weights, AmplitudeTrajectory, ConvolutionWeights, KernelMode};
use crate::bound_state::BoundStateSolver;
use crate::correlation::{correlation_timeseries, CorrelationRecord, InitialWeights, Partition};
use crate::error::{Error, Result};
use crate::mode_oracle::{diagonalize, DiscretizedBath};
use crate::reservoir::EmitterParams;
use output::{annotated_trajectory_csv, columns_csv, correlations_csv, table_csv, trajectory_csv, write_atomic};
use rayon::prelude::*;
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::{Path, PathBuf};

/// Coupling used by every preset.
pub const PRESET_ETA: f64 = 0.2;
/// Largest oracle-vs-solver deviation accepted by [`run_verify`].
pub const VERIFY_TOL: f64 = 1e-3;
/// A point where QD < EoF − this is reported as an ordering violation.
pub const ORDERING_SLACK: f64 = 1e-3;

pub const PRESETS: [&str; 4] = ["fig2", "fig3", "fig4", "fig4a"];

/// Files written by a run and remarks worth showing to the user.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl RunOutcome {
    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        write_atomic(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    fn plot(&mut self, cfg: &RunConfig, csv: &Path, kind: PlotKind) -> Result<()> {
        if cfg.output.plots {
            let svg = csv.with_extension("svg");
            emit_plot(csv, Some(kind), &svg)?;
            self.files.push(svg);
        }
        Ok(())
    }

    fn merge(&mut self, other: RunOutcome) {
        self.files.extend(other.files);
        self.notes.extend(other.notes);
    }
}

fn write_resolved(cfg: &RunConfig, out: &mut RunOutcome) -> Result<()> {
    let path = cfg.output_dir.join("resolved.toml");
    out.write(path, cfg.to_toml()?.as_bytes())
}

/// Writes `diagnostic.txt` describing a numerical failure.
pub fn write_diagnostic(dir: &Path, err: &Error, cfg: Option<&RunConfig>) -> Result<PathBuf> {
    let mut text = format!("error: {err}\n");
    if let Some(cfg) = cfg {
        text.push_str("\n# resolved configuration\n");
        text.push_str(&cfg.to_toml().unwrap_or_default());
    }
    let path = dir.join("diagnostic.txt");
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// Solves b(t) for several ω₀ sharing one reservoir and solver setup. The
/// kernel weights do not depend on ω₀, so they are built once.
fn solve_for_omegas(cfg: &RunConfig, omegas: &[f64]) -> Result<Vec<AmplitudeTrajectory>> {
    let emitters = omegas
        .iter()
        .map(|&w| EmitterParams::new(w, &cfg.reservoir))
        .collect::<Result<Vec<_>>>()?;
    if cfg.solver.convergence_check || cfg.solver.kernel_mode == KernelMode::Markovian {
        return emitters
            .par_iter()
            .map(|e| solve_amplitude(&cfg.reservoir, e, &cfg.solver))
            .collect();
    }
    let weights = ConvolutionWeights::for_config(&cfg.reservoir, &emitters[0], &cfg.solver)?;
    emitters
        .par_iter()
        .map(|e| solve_with_weights(&weights, e.omega_0()))
        .collect()
}

fn solve_one(cfg: &RunConfig) -> Result<AmplitudeTrajectory> {
    solve_amplitude(&cfg.reservoir, &cfg.emitter_params()?, &cfg.solver)
}

/// Mean over the final 10% of a series.
pub fn plateau_mean(values: &[f64]) -> f64 {
    let n = values.len();
    let start = n - (n / 10).max(1);
    values[start..].iter().sum::<f64>() / (n - start) as f64
}

fn ordering_violations(records: &[CorrelationRecord], partition: Partition) -> usize {
    records
        .iter()
        .filter_map(|r| r.get(partition))
        .filter(|v| v.qd < v.eof - ORDERING_SLACK)
        .count()
}

/// Amplitude only: `trajectory.csv`, plus `oracle.csv` when oracle modes are set.
pub fn run_solve(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut out = RunOutcome::default();
    write_resolved(cfg, &mut out)?;
    let traj = solve_one(cfg)?;
    let path = cfg.output_dir.join("trajectory.csv");
    out.write(path.clone(), &trajectory_csv(&traj, cfg.output.stride)?)?;
    out.plot(cfg, &path, PlotKind::Population)?;
    if let Some(dev) = traj.convergence_deviation {
        out.notes.push(format!("max |b(dt) − b(dt/2)| = {dev:e}"));
    }
    if let Some(n) = cfg.output.oracle_modes {
        let report = oracle_trajectory(cfg, n, &traj, &mut out)?;
        out.notes.push(report.describe());
    }
    Ok(out)
}

/// Amplitude plus `correlations.csv` for the configured partitions.
pub fn run_correlations(cfg: &RunConfig) -> Result<RunOutcome> {
    correlations_pipeline(cfg).map(|(out, _, _)| out)
}

fn correlations_pipeline(cfg: &RunConfig) -> Result<(RunOutcome, AmplitudeTrajectory, Vec<CorrelationRecord>)> {
    cfg.validate()?;
    let mut out = RunOutcome::default();
    write_resolved(cfg, &mut out)?;
    let traj = solve_one(cfg)?;
    let path = cfg.output_dir.join("trajectory.csv");
    out.write(path, &trajectory_csv(&traj, cfg.output.stride)?)?;
    let records = correlations_for(cfg, &traj, &cfg.weights()?, &cfg.partitions)?;
    let path = cfg.output_dir.join("correlations.csv");
    out.write(path.clone(), &correlations_csv(&records, &cfg.partitions)?)?;
    out.plot(cfg, &path, PlotKind::Correlations)?;
    for &p in &cfg.partitions {
        let v = ordering_violations(&records, p);
        if v > 0 {
            out.notes.push(format!("{p}: QD < EoF − {ORDERING_SLACK} at {v} time points"));
        }
    }
    Ok((out, traj, records))
}

fn correlations_for(
    cfg: &RunConfig,
    traj: &AmplitudeTrajectory,
    w: &InitialWeights,
    partitions: &[Partition],
) -> Result<Vec<CorrelationRecord>> {
    correlation_timeseries(traj, w, partitions, &cfg.discord, cfg.output.stride)
}

/// Bound-state search for the configured ω₀: `bound_state.csv` (y(E) − E
/// curve) and `bound_state_summary.csv`.
pub fn run_bound_state(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut out = RunOutcome::default();
    write_resolved(cfg, &mut out)?;
    let emitter = cfg.emitter_params()?;
    let solver = BoundStateSolver::new(&cfg.reservoir, &emitter);
    let res = solver.find()?;
    let energies = energy_grid(cfg.reservoir.omega_c, cfg.emitter.omega_0);
    let curve = solver.curve(&energies)?;
    let col = (format!("y_minus_e_w{}", cfg.emitter.omega_0), curve.iter().map(|c| c.1).collect());
    let path = cfg.output_dir.join("bound_state.csv");
    out.write(path.clone(), &columns_csv("E", &energies, &[col])?)?;
    out.plot(cfg, &path, PlotKind::BoundState)?;
    let row = bound_row(cfg.emitter.omega_0, &res);
    out.write(cfg.output_dir.join("bound_state_summary.csv"), &table_csv(&BOUND_HEADER, &[row])?)?;
    out.notes.push(match (res.energy, res.residue) {
        (Some(e), Some(z)) => format!("bound state at E1 = {e}, residue Z = {z}"),
        _ => "no bound state below the band edge".to_string(),
    });
    Ok(out)
}

const BOUND_HEADER: [&str; 6] = ["omega_0", "exists", "marginal", "energy", "residue", "y_at_edge"];

fn bound_row(omega_0: f64, res: &crate::bound_state::BoundStateResult) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    vec![
        omega_0.to_string(),
        res.exists.to_string(),
        res.marginal.to_string(),
        opt(res.energy),
        opt(res.residue),
        res.y_at_edge.to_string(),
    ]
}

/// E grid for y(E) − E curves: from well below min(ω₀, 0) up to just under ω_c.
fn energy_grid(omega_c: f64, lowest_omega_0: f64) -> Vec<f64> {
    let lo = lowest_omega_0.min(0.0) - 2.0;
    let hi = omega_c - 1e-3;
    let n = 600;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Oracle-vs-solver comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub n_modes: usize,
    pub recurrence_time: f64,
    /// Comparison window end, min(t_max, recurrence / 2).
    pub t_compared: f64,
    pub max_deviation: f64,
    pub oracle_overlap: Option<f64>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.max_deviation < VERIFY_TOL
    }

    fn describe(&self) -> String {
        format!(
            "oracle with {} modes: max |b − b_oracle| = {:e} for t ≤ {} (recurrence time {:.1})",
            self.n_modes, self.max_deviation, self.t_compared, self.recurrence_time
        )
    }
}

fn oracle_trajectory(cfg: &RunConfig, n_modes: usize, traj: &AmplitudeTrajectory, out: &mut RunOutcome) -> Result<VerifyReport> {
    let emitter = cfg.emitter_params()?;
    let bath = DiscretizedBath::new(&cfg.reservoir, n_modes)?;
    let recurrence_time = bath.recurrence_time();
    let t_compared = cfg.solver.t_max.min(0.5 * recurrence_time);
    let spectrum = diagonalize(&bath, &emitter, &cfg.reservoir);
    let keep = traj.t.iter().take_while(|&&t| t <= t_compared + 1e-12).count();
    let oracle = spectrum.evolve_exact(&traj.t[..keep])?;
    let max_deviation = oracle
        .b
        .iter()
        .zip(&traj.b)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let meta = [
        ("n_modes", n_modes.to_string()),
        ("k_max", cfg.reservoir.k_max.to_string()),
        ("recurrence_time", recurrence_time.to_string()),
    ];
    out.write(
        cfg.output_dir.join("oracle.csv"),
        &annotated_trajectory_csv(&oracle, cfg.output.stride, &meta)?,
    )?;
    Ok(VerifyReport {
        n_modes,
        recurrence_time,
        t_compared,
        max_deviation,
        oracle_overlap: spectrum.bound_state_overlap().map(|b| b.overlap_sqr),
    })
}

/// Solver against the discrete-mode oracle; writes `trajectory.csv`,
/// `oracle.csv` and `verify.csv`.
pub fn run_verify(cfg: &RunConfig, n_modes: usize) -> Result<(RunOutcome, VerifyReport)> {
    cfg.validate()?;
    let mut out = RunOutcome::default();
    write_resolved(cfg, &mut out)?;
    let traj = solve_one(cfg)?;
    out.write(cfg.output_dir.join("trajectory.csv"), &trajectory_csv(&traj, cfg.output.stride)?)?;
    let report = oracle_trajectory(cfg, n_modes, &traj, &mut out)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let row = vec![
        report.n_modes.to_string(),
        report.recurrence_time.to_string(),
        report.t_compared.to_string(),
        report.max_deviation.to_string(),
        VERIFY_TOL.to_string(),
        report.passed().to_string(),
        opt(report.oracle_overlap),
    ];
    out.write(
        cfg.output_dir.join("verify.csv"),
        &table_csv(
            &["n_modes", "recurrence_time", "t_compared", "max_deviation", "tolerance", "passed", "overlap_sqr"],
            &[row],
        )?,
    )?;
    out.notes.push(report.describe());
    Ok((out, report))
}

fn alpha_label(alpha: f64) -> String {
    if alpha == FRAC_1_SQRT_2 {
        "1_sqrt2".to_string()
    } else {
        alpha.to_string()
    }
}

/// Preset configuration: the base settings with the preset coupling.
fn preset_base(name: &str, base: &RunConfig) -> RunConfig {
    let mut cfg = base.clone();
    cfg.preset = Some(name.to_string());
    cfg.reservoir.eta = PRESET_ETA;
    cfg
}

/// Runs one of [`PRESETS`] with `base` supplying solver, discord and output
/// settings. The coupling is always η = 0.2.
pub fn run_preset(name: &str, base: &RunConfig) -> Result<RunOutcome> {
    let cfg = preset_base(name, base);
    cfg.validate()?;
    let mut out = RunOutcome::default();
    write_resolved(&cfg, &mut out)?;
    match name {
        "fig2" => correlation_panels(
            &cfg,
            "fig2",
            &[0.1, 10.0],
            &[FRAC_1_SQRT_2, 0.2, 0.3],
            &[Partition::N1N2],
            &mut out,
        )?,
        "fig3" => correlation_panels(
            &cfg,
            "fig3",
            &[0.1, 10.0],
            &[FRAC_1_SQRT_2, 0.2],
            &Partition::FIGURE,
            &mut out,
        )?,
        "fig4" => population_panel(&cfg, &[0.1, 1.0, 2.0, 5.0, 10.0], &mut out)?,
        "fig4a" => bound_state_panel(&cfg, &[0.1, 1.0, 2.0, 5.0, 10.0], &mut out)?,
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}` (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    }
    Ok(out)
}

fn correlation_panels(
    cfg: &RunConfig,
    prefix: &str,
    omegas: &[f64],
    alphas: &[f64],
    partitions: &[Partition],
    out: &mut RunOutcome,
) -> Result<()> {
    let trajs = solve_for_omegas(cfg, omegas)?;
    let mut summary = Vec::new();
    for (&w0, traj) in omegas.iter().zip(&trajs) {
        for &alpha in alphas {
            let weights = InitialWeights::from_alpha(alpha)?;
            let records = correlations_for(cfg, traj, &weights, partitions)?;
            let path = cfg
                .output_dir
                .join(format!("{prefix}_w{w0}_a{}.csv", alpha_label(alpha)));
            out.write(path.clone(), &correlations_csv(&records, partitions)?)?;
            out.plot(cfg, &path, PlotKind::Correlations)?;
            for &p in partitions {
                let qd: Vec<f64> = records.iter().filter_map(|r| r.get(p)).map(|v| v.qd).collect();
                let eof: Vec<f64> = records.iter().filter_map(|r| r.get(p)).map(|v| v.eof).collect();
                let violations = ordering_violations(&records, p);
                if violations > 0 {
                    out.notes.push(format!(
                        "{prefix} ω₀ = {w0}, α = {}: {p} has QD < EoF − {ORDERING_SLACK} at {violations} time points",
                        alpha_label(alpha)
                    ));
                }
                summary.push(vec![
                    w0.to_string(),
                    alpha.to_string(),
                    p.name(),
                    plateau_mean(&qd).to_string(),
                    plateau_mean(&eof).to_string(),
                    violations.to_string(),
                ]);
            }
        }
    }
    out.write(
        cfg.output_dir.join(format!("{prefix}_summary.csv")),
        &table_csv(
            &["omega_0", "alpha", "partition", "qd_plateau", "eof_plateau", "qd_below_eof_points"],
            &summary,
        )?,
    )
}

fn population_panel(cfg: &RunConfig, omegas: &[f64], out: &mut RunOutcome) -> Result<()> {
    let trajs = solve_for_omegas(cfg, omegas)?;
    let stride = cfg.output.stride;
    let t: Vec<f64> = trajs[0].t.iter().step_by(stride).copied().collect();
    let columns: Vec<(String, Vec<f64>)> = omegas
        .iter()
        .zip(&trajs)
        .map(|(w0, tr)| (format!("pop_w{w0}"), tr.population().into_iter().step_by(stride).collect()))
        .collect();
    let path = cfg.output_dir.join("fig4_population.csv");
    out.write(path.clone(), &columns_csv("t", &t, &columns)?)?;
    out.plot(cfg, &path, PlotKind::Population)?;

    let mut rows = Vec::new();
    for (&w0, tr) in omegas.iter().zip(&trajs) {
        let emitter = EmitterParams::new(w0, &cfg.reservoir)?;
        let res = BoundStateSolver::new(&cfg.reservoir, &emitter).find()?;
        let mut row = bound_row(w0, &res);
        row.push(plateau_mean(&tr.population()).to_string());
        rows.push(row);
    }
    let mut header = BOUND_HEADER.to_vec();
    header.push("pop_plateau");
    out.write(cfg.output_dir.join("fig4_bound_states.csv"), &table_csv(&header, &rows)?)
}

fn bound_state_panel(cfg: &RunConfig, omegas: &[f64], out: &mut RunOutcome) -> Result<()> {
    let energies = energy_grid(cfg.reservoir.omega_c, omegas.iter().copied().fold(f64::INFINITY, f64::min));
    // y(E) − E = ω₀ + I(E) − E; the integral I(E) is shared by all ω₀.
    let integrals = energies
        .par_iter()
        .map(|&e| cfg.reservoir.spectral_integral(e))
        .collect::<Result<Vec<_>>>()?;
    let columns: Vec<(String, Vec<f64>)> = omegas
        .iter()
        .map(|&w0| {
            let col = energies.iter().zip(&integrals).map(|(e, i)| w0 + i - e).collect();
            (format!("y_minus_e_w{w0}"), col)
        })
        .collect();
    let path = cfg.output_dir.join("fig4a_curves.csv");
    out.write(path.clone(), &columns_csv("E", &energies, &columns)?)?;
    out.plot(cfg, &path, PlotKind::BoundState)?;
    let rows = omegas
        .iter()
        .map(|&w0| {
            let emitter = EmitterParams::new(w0, &cfg.reservoir)?;
            Ok(bound_row(w0, &BoundStateSolver::new(&cfg.reservoir, &emitter).find()?))
        })
        .collect::<Result<Vec<_>>>()?;
    out.write(cfg.output_dir.join("fig4a_bound_states.csv"), &table_csv(&BOUND_HEADER, &rows)?)
}

/// Parameter varied by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Omega0,
    Eta,
    Alpha,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "omega_0" | "omega0" | "w0" => Ok(Self::Omega0),
            "eta" => Ok(Self::Eta),
            "alpha" => Ok(Self::Alpha),
            other => Err(Error::Config(format!(
                "unknown sweep axis `{other}` (expected omega_0, eta or alpha)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Omega0 => "omega_0",
            Self::Eta => "eta",
            Self::Alpha => "alpha",
        }
    }

    fn apply(self, cfg: &mut RunConfig, value: f64) {
        match self {
            Self::Omega0 => cfg.emitter.omega_0 = value,
            Self::Eta => cfg.reservoir.eta = value,
            Self::Alpha => {
                cfg.initial.alpha = value;
                cfg.initial.beta = None;
            }
        }
    }
}

/// One correlations run per value, run concurrently, each in its own
/// subdirectory. Failed runs are recorded in `sweep_summary.csv` and do not
/// stop the others.
pub fn run_sweep(cfg: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<RunOutcome> {
    cfg.validate()?;
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let mut out = RunOutcome::default();
    write_resolved(cfg, &mut out)?;
    let first = cfg.partitions[0];
    let runs: Vec<(f64, Result<(RunOutcome, f64, f64, f64)>)> = values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut run = cfg.clone();
            axis.apply(&mut run, v);
            run.output_dir = cfg.output_dir.join(format!("sweep_{}_{i:03}", axis.name()));
            let result = correlations_pipeline(&run).map(|(o, traj, records)| {
                let pop = plateau_mean(&traj.population());
                let qd: Vec<f64> = records.iter().filter_map(|r| r.get(first)).map(|x| x.qd).collect();
                let eof: Vec<f64> = records.iter().filter_map(|r| r.get(first)).map(|x| x.eof).collect();
                (o, pop, plateau_mean(&qd), plateau_mean(&eof))
            });
            (v, result)
        })
        .collect();

    let mut rows = Vec::new();
    for (v, result) in runs {
        match result {
            Ok((o, pop, qd, eof)) => {
                out.merge(o);
                rows.push(vec![v.to_string(), "ok".into(), pop.to_string(), qd.to_string(), eof.to_string(), String::new()]);
            }
            Err(e) => {
                out.notes.push(format!("{} = {v}: {e}", axis.name()));
                rows.push(vec![v.to_string(), "error".into(), String::new(), String::new(), String::new(), e.to_string()]);
            }
        }
    }
    let qd_col = format!("qd_{first}_plateau");
    let eof_col = format!("eof_{first}_plateau");
    out.write(
        cfg.output_dir.join("sweep_summary.csv"),
        &table_csv(&[axis.name(), "status", "pop_plateau", &qd_col, &eof_col, "error"], &rows)?,
    )?;
    Ok(out)
}
