//! `affclan`: classify matrices by affine clans, print orbit invariants,
//! enumerate clans and run the property suites.

mod commands;
mod fuzz;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use affclan::correspondence::CorrespondenceError;
use affclan::io::IoError;
use affclan::{LaurentError, LinalgError, ReductionError};

#[derive(Parser, Debug)]
#[command(name = "affclan", version, about = "Affine clans and K-orbits on the affine flag variety of GL_n")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Size of the first block of K.
    #[arg(long, global = true)]
    pub p: Option<usize>,
    /// Size of the second block of K.
    #[arg(long, global = true)]
    pub q: Option<usize>,
    /// Characteristic of the residue field (odd prime).
    #[arg(long = "char", global = true, env = "AFFCLAN_CHAR", default_value_t = 101)]
    pub characteristic: u32,
    /// Seed for randomized commands.
    #[arg(long, global = true, env = "AFFCLAN_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Render {
    Text,
    Dot,
}

impl Render {
    fn name(self) -> &'static str {
        match self {
            Render::Text => "text",
            Render::Dot => "dot",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce a matrix to its clan matrix and print the clan.
    Classify {
        /// Matrix file (text or JSON); stdin when absent or `-`.
        input: Option<PathBuf>,
        /// Also print k and b with k*g*b equal to the clan matrix.
        #[arg(long)]
        witness: bool,
    },
    /// Print the invariant table of the flag of a matrix.
    Invariants {
        input: Option<PathBuf>,
        /// Largest j for (i;j); defaults to m + n.
        #[arg(long)]
        jmax: Option<i64>,
        /// Regenerate the three reference tables instead of reading a matrix.
        #[arg(long)]
        paper_tables: bool,
        /// Directory for `--paper-tables` output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the affine clans with shifts bounded by the depth.
    Enumerate {
        #[arg(long, default_value_t = 1)]
        depth: u32,
        /// Append the clan matrix of each clan.
        #[arg(long)]
        with_matrices: bool,
        /// Append the winding diagram of each clan.
        #[arg(long, value_enum)]
        render: Option<Render>,
    },
    /// Run a randomized property suite.
    Fuzz {
        #[arg(value_enum)]
        suite: fuzz::Suite,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Shift bound for the roundtrip suite.
        #[arg(long, default_value_t = 1)]
        depth: u32,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Property(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Property(_) => 1,
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular => CliError::Domain(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Linalg(inner) => inner.into(),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::SingularInput => CliError::Domain(e.to_string()),
            ReductionError::Shape { .. } => CliError::Parse(e.to_string()),
            ReductionError::Internal(_) => CliError::Property(e.to_string()),
        }
    }
}

impl From<CorrespondenceError> for CliError {
    fn from(e: CorrespondenceError) -> Self {
        match e {
            CorrespondenceError::Singular => CliError::Domain(e.to_string()),
            CorrespondenceError::Shape { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Property(e.to_string()),
        }
    }
}

impl From<LaurentError> for CliError {
    fn from(e: LaurentError) -> Self {
        CliError::Parse(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    affclan::set_characteristic(cli.config.characteristic)?;
    if cli.config.p == Some(0) && cli.config.q == Some(0) {
        return Err(CliError::Parse("p + q must be at least 1".into()));
    }
    let cfg = &cli.config;
    match cli.command {
        Command::Classify { input, witness } => commands::classify(cfg, input.as_deref(), witness),
        Command::Invariants { input, jmax, paper_tables, out } => {
            if paper_tables {
                commands::paper_tables(cfg, out.as_deref())
            } else {
                commands::invariants(cfg, input.as_deref(), jmax)
            }
        }
        Command::Enumerate { depth, with_matrices, render } => commands::enumerate(cfg, depth, with_matrices, render),
        Command::Fuzz { suite, trials, depth } => fuzz::run(cfg, suite, trials, depth),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
