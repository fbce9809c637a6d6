//! `nip` — command-line driver for the non-Hermitian interaction-picture
//! simulator.
//!
//! Exit codes:
//!
//! * `0` — run completed and every monitored invariant held;
//! * `1` — the run completed mechanically but an invariant failed, or the
//!   library refused a structurally degenerate problem (exceptional point,
//!   indefinite metric, defective spectrum, …);
//! * `2` — usage error: bad flags, bad configuration, unwritable output,
//!   or a window that requires `--force-ep`;
//! * `3` — numerical failure: the integration blew up or the linear-algebra
//!   backend failed.

mod config;
mod modes;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::Config;
use modes::RunContext;

/// Error carried to the process boundary; each kind maps to an exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invocation or configuration problem (exit 2).
    Usage(String),
    /// Filesystem problem (exit 2).
    Io(String),
    /// Library refusal or failure (exit 1 or 3, by kind).
    Core(nip_core::Error),
}

impl From<nip_core::Error> for CliError {
    fn from(e: nip_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn exit_code_for(err: &CliError) -> u8 {
    use nip_core::Error as E;
    match err {
        CliError::Usage(_) | CliError::Io(_) => 2,
        CliError::Core(e) => match e {
            // Numerical breakdown while the problem itself was legitimate.
            E::NumericBlowup { .. } | E::Backend(_) | E::NonFiniteSchedule { .. } => 3,
            // Malformed requests that slipped past config validation.
            E::InvalidStep(_)
            | E::InvalidWindow { .. }
            | E::DimensionTooSmall(_)
            | E::DimensionMismatch { .. }
            | E::IndexOutOfRange { .. }
            | E::InsufficientSamples { .. }
            | E::SampleOutOfRange(_) => 2,
            // Structural refusals: the model is degenerate where we probed it.
            _ => 1,
        },
    }
}

#[derive(Parser)]
#[command(
    name = "nip",
    version,
    about = "Quasi-Hermitian evolution in the non-Hermitian interaction picture"
)]
struct Cli {
    #[command(subcommand)]
    mode: Mode,

    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file (flags below override its window settings).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for CSV/JSON artefacts (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Integrator step size (overrides the config).
    #[arg(long, global = true, value_name = "H")]
    step: Option<f64>,

    /// Time window as `t0,t1` (overrides the config).
    #[arg(long, global = true, value_name = "T0,T1", value_parser = parse_window)]
    window: Option<(f64, f64)>,

    /// Proceed even when the window approaches an exceptional point.
    #[arg(long, global = true)]
    force_ep: bool,

    /// Seed for the randomised checks (overrides the config).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Mode {
    /// Scan the instantaneous eigenvalues of R(t) over the window.
    Spectrum,
    /// Reconstruct the metric over the window and audit both construction paths.
    Metric,
    /// Integrate the conjugate Schrödinger pair and monitor invariants.
    Evolve,
    /// Run the full invariant battery and report a verdict.
    Verify,
}

fn parse_window(raw: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `t0,t1`, got `{raw}`"));
    }
    let t0: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse `{}` as a number", parts[0]))?;
    let t1: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse `{}` as a number", parts[1]))?;
    Ok((t0, t1))
}

fn build_context(common: &Common) -> Result<RunContext, CliError> {
    let mut config = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some((t0, t1)) = common.window {
        config.window.t0 = t0;
        config.window.t1 = t1;
    }
    if let Some(h) = common.step {
        config.window.step = h;
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    config.validate()?;
    let (t0, t1, step) = (config.window.t0, config.window.t1, config.window.step);
    if step <= 0.0 || !step.is_finite() {
        return Err(CliError::Usage(format!(
            "step must be a positive finite number, got {step}"
        )));
    }
    if t1 <= t0 || !t0.is_finite() || !t1.is_finite() {
        return Err(CliError::Usage(format!(
            "window must satisfy t0 < t1, got [{}, {}]",
            config.window.t0, config.window.t1
        )));
    }
    let system = config.to_system()?;
    std::fs::create_dir_all(&common.out).map_err(|e| {
        CliError::Io(format!(
            "cannot create output dir {}: {e}",
            common.out.display()
        ))
    })?;
    Ok(RunContext {
        config,
        system,
        out_dir: common.out.clone(),
        force_ep: common.force_ep,
    })
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let ctx = build_context(&cli.common)?;
    match cli.mode {
        Mode::Spectrum => modes::run_spectrum(&ctx),
        Mode::Metric => modes::run_metric(&ctx),
        Mode::Evolve => modes::run_evolve(&ctx),
        Mode::Verify => modes::run_verify(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("nip: invariant check failed (see summary.json)");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("nip: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
