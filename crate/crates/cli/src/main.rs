//! `seqpt`: designs, channels, shot planning, estimation, sweeps and
//! identity checks from the command line.
//!
//! Exit codes: 0 success, 1 a verified identity failed, 2 configuration
//! error, 3 input data violating an invariant.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "seqpt", version, about = "Selective and efficient quantum process tomography")]
pub struct Cli {
    /// Root seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the input-state design for a dimension and scheme.
    Design(DesignArgs),
    /// Write a standard channel (or its χ matrix) to a file.
    Channel(ChannelArgs),
    /// Shots needed for a target error and confidence.
    Plan(PlanArgs),
    /// Estimate χ-matrix elements of a channel.
    Estimate(EstimateArgs),
    /// Repeated estimates over a list of shot counts.
    Sweep(SweepArgs),
    /// Check the averaging identities numerically.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Primepower,
    Tensor,
    Projected,
}

impl From<SchemeArg> for seqpt::EstimatorScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Primepower => seqpt::EstimatorScheme::PrimePower,
            SchemeArg::Tensor => seqpt::EstimatorScheme::Tensor,
            SchemeArg::Projected => seqpt::EstimatorScheme::Projected,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Montecarlo,
    Exact,
}

impl From<ModeArg> for seqpt::Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Montecarlo => seqpt::Mode::MonteCarlo,
            ModeArg::Exact => seqpt::Mode::Exact,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SchemeSelection {
    /// Default: primepower for prime-power dimensions, tensor otherwise.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Embedding dimension of the projected scheme (default: next prime power).
    #[arg(long = "big-dim", short = 'D')]
    pub big: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    #[arg(long)]
    pub dim: usize,
    #[command(flatten)]
    pub scheme: SchemeSelection,
}

#[derive(Args, Debug)]
pub struct ChannelArgs {
    #[arg(long)]
    pub dim: usize,
    /// `identity`, `depolarizing:λ`, `unitary:k`, `random_unitary:seed`, `random_cptp:rank,seed`.
    #[arg(long)]
    pub channel: String,
    /// Write the χ matrix in the Weyl product basis instead of Kraus operators.
    #[arg(long)]
    pub chi: bool,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    /// Needed by the tensor scheme unless --factors is given.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of tensor factors when no dimension is given.
    #[arg(long)]
    pub factors: Option<usize>,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.95)]
    pub conf: f64,
}

#[derive(Args, Debug, Clone)]
pub struct Target {
    /// Standard channel shorthand or path to a channel JSON file.
    #[arg(long)]
    pub channel: String,
    /// Required unless the channel comes from a file.
    #[arg(long)]
    pub dim: Option<usize>,
    #[command(flatten)]
    pub scheme: SchemeSelection,
    #[arg(long, value_enum, default_value_t = ModeArg::Montecarlo)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.95)]
    pub conf: f64,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long, requires = "j")]
    pub i: Option<usize>,
    #[arg(long, requires = "i")]
    pub j: Option<usize>,
    /// Element list `i:j,i:j,...`.
    #[arg(long, conflicts_with_all = ["i", "all"])]
    pub pairs: Option<String>,
    /// Every element of the χ matrix.
    #[arg(long, conflicts_with = "i")]
    pub all: bool,
    #[arg(long, conflicts_with = "eps")]
    pub shots: Option<u64>,
    /// Target error; the shot count then comes from the scheme's bound.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    #[arg(long, default_value_t = 0)]
    pub j: usize,
    /// Comma-separated shot counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub shots: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    pub reps: u64,
    /// Emit per-shot-count error quantiles instead of one row per repetition.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Identity name or `all`.
    #[arg(long, default_value = "all")]
    pub identity: String,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Embedding dimension for the projected-design identity.
    #[arg(long = "big-dim", short = 'D')]
    pub big: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
}

fn configure_threads() -> Result<(), commands::CliError> {
    let Ok(raw) = std::env::var("SEQPT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| commands::CliError::Config(format!("SEQPT_THREADS must be a non-negative integer, got '{raw}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| commands::CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
