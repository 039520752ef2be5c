use clap::{Args, Parser, Subcommand};
use gapcorr::scenario::{
    self, emit_plot, run_bound_state, run_correlations, run_preset, run_solve, run_sweep, run_verify, write_diagnostic,
    PlotKind, RunConfig, RunOutcome, SweepAxis,
};
use gapcorr::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Emitter dynamics and quantum correlations in photonic band-gap reservoirs.
#[derive(Parser, Debug)]
#[command(name = "gapcorr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Keep every n-th time point in written series.
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Number of discrete modes for the oracle comparison.
    #[arg(long, global = true)]
    oracle_modes: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Excited-state amplitude b(t) and its rates.
    Solve,
    /// b(t) plus discord, entanglement of formation and mutual information.
    Correlations,
    /// Bound-state search and the y(E) − E curve.
    BoundState,
    /// Reproduce one of the figure presets: fig2, fig3, fig4, fig4a.
    Preset { name: String },
    /// One run per value of a parameter.
    Sweep {
        /// omega_0, eta or alpha.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Compare the solver against the discrete-mode oracle.
    Verify,
    /// Render a CSV output as SVG.
    Plot {
        csv: PathBuf,
        /// population, correlations or bound-state; inferred from the header when omitted.
        #[arg(long)]
        kind: Option<String>,
    },
}

const DEFAULT_ORACLE_MODES: usize = 4000;

fn load_config(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::for_emitter(0.1),
    };
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(stride) = common.stride {
        cfg.output.stride = stride;
    }
    if let Some(n) = common.oracle_modes {
        cfg.output.oracle_modes = Some(n);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(outcome: &RunOutcome) {
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    for n in &outcome.notes {
        println!("note: {n}");
    }
}

enum Failure {
    Config(String),
    Numerical(String),
}

fn classify(err: Error, dir: &Path, cfg: Option<&RunConfig>) -> Failure {
    if err.is_numerical() {
        let msg = match write_diagnostic(dir, &err, cfg) {
            Ok(path) => format!("{err} (diagnostic written to {})", path.display()),
            Err(e) => format!("{err} (could not write diagnostic: {e})"),
        };
        Failure::Numerical(msg)
    } else {
        Failure::Config(err.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli.common).map_err(|e| Failure::Config(e.to_string()))?;
    let dir = cfg.output_dir.clone();
    let fail = |e: Error| classify(e, &dir, Some(&cfg));
    match cli.command {
        Command::Solve => report(&run_solve(&cfg).map_err(fail)?),
        Command::Correlations => report(&run_correlations(&cfg).map_err(fail)?),
        Command::BoundState => report(&run_bound_state(&cfg).map_err(fail)?),
        Command::Preset { name } => {
            if !scenario::PRESETS.contains(&name.as_str()) {
                return Err(Failure::Config(format!(
                    "unknown preset `{name}` (expected one of {})",
                    scenario::PRESETS.join(", ")
                )));
            }
            report(&run_preset(&name, &cfg).map_err(fail)?)
        }
        Command::Sweep { axis, values } => {
            let axis = SweepAxis::parse(&axis).map_err(|e| Failure::Config(e.to_string()))?;
            report(&run_sweep(&cfg, axis, &values).map_err(fail)?)
        }
        Command::Verify => {
            let n = cfg.output.oracle_modes.unwrap_or(DEFAULT_ORACLE_MODES);
            let (outcome, verdict) = run_verify(&cfg, n).map_err(fail)?;
            report(&outcome);
            if !verdict.passed() {
                return Err(fail(Error::OracleMismatch {
                    deviation: verdict.max_deviation,
                    tol: scenario::VERIFY_TOL,
                }));
            }
        }
        Command::Plot { csv, kind } => {
            let kind = kind.as_deref().map(PlotKind::parse).transpose().map_err(|e| Failure::Config(e.to_string()))?;
            let svg = match &cli.common.out {
                Some(out) if out.extension().is_some_and(|e| e == "svg") => out.clone(),
                Some(out) => out.join(csv.with_extension("svg").file_name().unwrap_or_default()),
                None => csv.with_extension("svg"),
            };
            emit_plot(&csv, kind, &svg).map_err(|e| Failure::Config(e.to_string()))?;
            println!("wrote {}", svg.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
