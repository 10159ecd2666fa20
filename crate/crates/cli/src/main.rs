//! `reset-search`: evaluate, optimize, tabulate and simulate expected search
//! times under stochastic resetting.
//!
//! Output is a JSON report on stdout (`--pretty` for aligned text). Exit
//! codes: 0 success, 1 usage, 2 unsupported dimension/mechanism pair,
//! 3 non-convergence or no finite value, 4 I/O, 5 excessive censoring.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use reset_search::model::MechanismKind;
use reset_search::Error;

#[derive(Debug, Parser)]
#[command(name = "reset-search", version, about = "Expected search times with stochastic resetting")]
struct Cli {
    /// Aligned text instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,

    /// Include wall-clock time in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expected hitting time for a fixed or Gaussian target.
    Eval(EvalArgs),
    /// Optimal rate or period for a Gaussian target.
    Optimize(OptimizeArgs),
    /// All seven optimal constants as CSV, or one objective on a grid.
    Table(TableArgs),
    /// Monte Carlo estimate for a fixed or Gaussian target.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MechanismArg {
    Poisson,
    Periodic,
    Bridge,
}

impl From<MechanismArg> for MechanismKind {
    fn from(m: MechanismArg) -> Self {
        match m {
            MechanismArg::Poisson => MechanismKind::Poissonian,
            MechanismArg::Periodic => MechanismKind::Periodic,
            MechanismArg::Bridge => MechanismKind::Bridge,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct ModelArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: u8,
    #[arg(long, value_enum)]
    mechanism: MechanismArg,
    /// Diffusion coefficient D.
    #[arg(long, default_value_t = 1.0)]
    diffusion: f64,
    /// Detection radius for d >= 2.
    #[arg(long, default_value_t = 0.01)]
    eps0: f64,
}

#[derive(Debug, Clone, Args)]
struct TargetArgs {
    /// Reset rate r (poisson).
    #[arg(long)]
    rate: Option<f64>,
    /// Reset period T (periodic, bridge).
    #[arg(long)]
    period: Option<f64>,
    /// Gaussian target variance; the default target when no --target-a.
    #[arg(long, conflicts_with = "target_a")]
    sigma2: Option<f64>,
    /// Fixed target: one value per coordinate, or a single distance.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    target_a: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    target: TargetArgs,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: u8,
    #[arg(long, value_enum)]
    mechanism: MechanismArg,
    #[arg(long, default_value_t = 1.0)]
    diffusion: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Dimensionless search interval LO:HI.
    #[arg(long, value_parser = parse_bracket)]
    bracket: Option<(f64, f64)>,
    #[arg(long, default_value_t = reset_search::optimize::DEFAULT_X_TOL)]
    x_tol: f64,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Evaluate one dimensionless objective on a grid instead.
    #[arg(long, requires_all = ["mechanism", "dim", "grid"])]
    curve: bool,
    #[arg(long, value_enum)]
    mechanism: Option<MechanismArg>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: Option<u8>,
    /// Linear grid LO:HI:N (N points, both ends included).
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(f64, f64, usize)>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    target: TargetArgs,
    /// Replicates.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Base time step; defaults to a²/(400 D) in 1D and (eps0/10)²/D above.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = reset_search::mc::DEFAULT_MAX_RESETS)]
    max_resets: usize,
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err("expected LO:HI:N".into());
    };
    let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let n = n.trim().parse::<usize>().map_err(|e| e.to_string())?;
    if n < 2 || lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err("need LO < HI and N >= 2".into());
    }
    Ok((lo, hi, n))
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(Error),
    Io(String),
    /// Downstream reader went away (e.g. `| head`); not an error.
    BrokenPipe,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            other => CliError::Model(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return CliError::BrokenPipe;
        }
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            if let csv::ErrorKind::Io(io) = e.into_kind() {
                return io.into();
            }
            unreachable!()
        }
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::BrokenPipe => 0,
            CliError::Usage(_) => 1,
            CliError::Io(_) => 4,
            CliError::Model(e) => match e {
                Error::InvalidParameter { .. } => 1,
                Error::UnsupportedCombination { .. } => 2,
                Error::NonConvergence { .. } | Error::NoFiniteValue { .. } | Error::BracketTooNarrow { .. } => 3,
                Error::ExcessiveCensoring { .. } => 5,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Model(e) => e.to_string(),
            CliError::BrokenPipe => String::new(),
        }
    }
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
    let started = std::time::Instant::now();
    let result = match &cli.command {
        Command::Eval(a) => commands::eval(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::Table(a) => commands::table(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(Some(mut report)) => {
            if cli.timing {
                report.set_wall_time(started.elapsed().as_secs_f64());
            }
            match report.print(cli.pretty) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e.into()),
            }
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    match e {
        CliError::BrokenPipe => ExitCode::SUCCESS,
        e => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
