//! `cpinf`: bifurcation tables, relative equilibria, horizontal sequences,
//! state verification and cluster detection from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{fail, CliError};

#[derive(Debug, Parser)]
#[command(name = "cpinf", version, about = "Critical points at infinity of N-body problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bifurcation values nu = mu gamma^2 / 2 of a three-body system, ascending.
    Bifurcation {
        /// System file (JSON).
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Circular relative equilibrium of one pair: r*, omega, h, nu.
    Re {
        #[arg(long)]
        system: PathBuf,
        /// Pair of 1-based body indices, e.g. `1,2`.
        #[arg(long, value_parser = commands::parse_pair)]
        pair: (usize, usize),
        /// Angular momentum of the pair.
        #[arg(long, allow_hyphen_values = true)]
        ell: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Generate a horizontal sequence, write its diagnostics as CSV and classify it.
    Sequence(SequenceArgs),
    /// Integrals, best multiplier and Lagrange residual of one state.
    Verify {
        /// State file: a system file with `positions` and optional `velocities` and `lambda`.
        #[arg(long)]
        state: PathBuf,
        /// Multiplier `x,y,z` to use instead of the fitted one.
        #[arg(long, value_parser = commands::parse_triple, allow_hyphen_values = true)]
        lambda: Option<[f64; 3]>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Detect clusters along a JSON-lines sequence and report additivity and per-cluster residuals.
    Clusters {
        /// JSON-lines file, one state record per line.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 10.0)]
        threshold: f64,
    },
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    #[arg(long)]
    pub system: PathBuf,
    /// The attracting pair, 1-based.
    #[arg(long, value_parser = commands::parse_pair, default_value = "1,2")]
    pub pair: (usize, usize),
    /// The receding body, 1-based.
    #[arg(long, default_value_t = 3)]
    pub singleton: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub ell: f64,
    /// First distance of the schedule; defaults to 10 times the pair separation.
    #[arg(long)]
    pub z0: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 14)]
    pub count: usize,
    /// CSV output; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the states as JSON lines.
    #[arg(long)]
    pub states_out: Option<PathBuf>,
    /// Classification summary (JSON); goes to standard output when `--out` is given.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return fail(&CliError::Usage(first));
        }
    };
    let result = match cli.command {
        Command::Bifurcation { system, format } => commands::bifurcation(&system, format),
        Command::Re { system, pair, ell, format } => commands::re(&system, pair, ell, format),
        Command::Sequence(args) => commands::sequence(&args),
        Command::Verify { state, lambda, format } => commands::verify(&state, lambda, format),
        Command::Clusters { input, window, threshold } => commands::clusters(&input, window, threshold),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
