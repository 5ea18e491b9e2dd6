//! `geomedian`: medians and means on manifolds, robustness radii and
//! range-cell target detection from the command line.

mod bounds;
mod radar;
mod selftest;
mod solve;
mod svg;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status for results that could not be certified.
const EXIT_NOT_CONVERGED: u8 = 1;
/// Exit status for bad arguments or unreadable input.
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "geomedian",
    version,
    about = "Fréchet medians and p-means on Riemannian manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the median or a p-mean of a discrete measure.
    #[command(subcommand)]
    Solve(solve::SolveCommand),
    /// Simulate range cells, detect targets, or emit spectra.
    #[command(subcommand)]
    Radar(radar::RadarCommand),
    /// Print the radii of balls guaranteed to contain every median.
    Bounds(bounds::BoundsArgs),
    /// Run a quick battery of internal consistency checks.
    Selftest,
}

/// Options shared by every command that writes files.
#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory receiving CSV, JSON and SVG outputs (created if missing).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write SVG plots into the output directory.
    #[arg(long)]
    pub svg: bool,
}

impl OutputArgs {
    pub fn path(&self, name: &str) -> Result<Option<PathBuf>, CliError> {
        let Some(dir) = &self.out_dir else {
            return Ok(None);
        };
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
        Ok(Some(dir.join(name)))
    }
}

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn not_converged(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NOT_CONVERGED,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<geomedian::Error> for CliError {
    fn from(e: geomedian::Error) -> Self {
        use geomedian::Error as E;
        let code = match e {
            E::Parse(_)
            | E::Argument(_)
            | E::InvalidPoint(_)
            | E::DimensionMismatch { .. }
            | E::Io(_)
            | E::Csv(_)
            | E::Json(_) => EXIT_USAGE,
            _ => EXIT_NOT_CONVERGED,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("GEOMEDIAN_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            CliError::usage(format!(
                "GEOMEDIAN_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Solve(cmd) => solve::run(cmd),
        Command::Radar(cmd) => radar::run(cmd),
        Command::Bounds(args) => bounds::run(&args),
        Command::Selftest => selftest::run(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
