//! The `naklab` command line: argument structs, dispatch and exit codes.
//!
//! Every output starts with the resolved configuration, so any result file
//! can be passed back to `naklab replay` to regenerate it.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{BoundKind, Variant};
use crate::error::Error;
use crate::sim::LeadDist;
use crate::throughput::SafetyBound;
use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Run(Error::Parameter(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "naklab",
    version,
    about = "Latency-security bounds and mining-race simulation for Nakamoto consensus"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check 1/a > Δ + 1/h and report the largest tolerable adversarial fraction.
    Tolerance(ToleranceArgs),
    /// cdf of the number of balanced heights, optionally against the extremal chain.
    BalancedCdf(BalancedArgs),
    /// pmf e(i) of the maximum adversary-minus-pacer difference.
    PmfM(PmfArgs),
    /// Evaluate one bound at a list of latencies.
    Bound(BoundArgs),
    /// Smallest confirmation depth meeting a target.
    MinDepth(MinArgs),
    /// Smallest confirmation time meeting a target.
    MinTime(MinArgs),
    /// Depth needed for a target at several adversarial fractions.
    TableDepth(TableArgs),
    /// Throughput-latency optimization.
    #[command(subcommand)]
    Throughput(ThroughputCommand),
    /// Monte-Carlo of the mining race.
    Simulate(SimArgs),
    /// Evaluate bounds over a latency grid, optionally for several β.
    Sweep(SweepArgs),
    /// Re-run the configuration stored in a result or config file.
    Replay(ReplayArgs),
}

/// Give either `--a --h` or `--lambda --beta`. Rates accept ratios like `1/600`.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ParamArgs {
    /// Adversarial mining rate, blocks per second.
    #[arg(long)]
    pub a: Option<String>,
    /// Honest mining rate, blocks per second.
    #[arg(long)]
    pub h: Option<String>,
    /// Total mining rate a + h.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Adversarial fraction a / (a + h).
    #[arg(long)]
    pub beta: Option<String>,
    /// Delay bound in seconds.
    #[arg(long)]
    pub delta: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct OutArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ToleranceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BalancedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Largest n tabulated.
    #[arg(long, default_value_t = 10)]
    pub n: u64,
    /// Also tabulate the finite-depth cdf F^(k).
    #[arg(long)]
    pub k: Option<u64>,
    /// Add an empirical column from this many runs of the extremal chain.
    #[arg(long)]
    pub empirical_trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PmfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Fixed order; by default the series runs until the residual is below --tol.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    /// depth-upper, depth-lower, depth-chernoff, time-upper or time-lower.
    #[serde(skip)]
    pub kind: BoundKind,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Depths k or times t (seconds), comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub latency: Vec<String>,
    #[arg(long, default_value = "canonical")]
    pub variant: Variant,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MinArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Bound to invert; defaults to the finer upper bound.
    #[arg(long)]
    pub kind: Option<BoundKind>,
    /// Largest acceptable violation probability.
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value = "canonical")]
    pub variant: Variant,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TableArgs {
    #[arg(long, default_value = "1/600")]
    pub lambda: String,
    #[arg(long, default_value = "10")]
    pub delta: String,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
    pub betas: Vec<String>,
    #[arg(long, default_value = "1e-3")]
    pub target: String,
    #[arg(long, default_value = "canonical")]
    pub variant: Variant,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Subcommand)]
pub enum ThroughputCommand {
    /// Best (λ, B) under a safety target and a confirmation-time budget.
    Opt(ThroughputArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThroughputArgs {
    #[arg(long)]
    pub beta: String,
    /// Network rate, KB/s.
    #[arg(long)]
    pub r: String,
    /// Fixed per-block delay, seconds.
    #[arg(long)]
    pub nu: String,
    /// Largest acceptable violation probability.
    #[arg(long)]
    pub q: String,
    /// Expected confirmation-time budget, seconds.
    #[arg(long)]
    pub d: String,
    /// Fork numbers λΔ to try instead of the default grid.
    #[arg(long, value_delimiter = ',')]
    pub fork_number: Vec<String>,
    #[arg(long, default_value = "10")]
    pub b_min: String,
    #[arg(long, default_value = "1e5")]
    pub b_max: String,
    /// Points per grid axis.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// chernoff or finer.
    #[arg(long, default_value = "chernoff")]
    pub safety: SafetyBound,
    #[arg(long, default_value = "canonical")]
    pub variant: Variant,
    /// Write every grid point to this CSV.
    #[arg(long)]
    pub frontier: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimKind {
    MaxDiff,
    Lead,
    AttackDepth,
    AttackTime,
    Invariants,
}

impl SimKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::MaxDiff => "max-diff",
            Self::Lead => "lead",
            Self::AttackDepth => "attack-depth",
            Self::AttackTime => "attack-time",
            Self::Invariants => "invariants",
        }
    }
}

impl std::str::FromStr for SimKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Self::MaxDiff, Self::Lead, Self::AttackDepth, Self::AttackTime, Self::Invariants]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown simulation '{s}' (max-diff|lead|attack-depth|attack-time|invariants)"))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimArgs {
    /// max-diff, lead, attack-depth, attack-time or invariants.
    #[serde(skip)]
    pub kind: SimKind,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Seconds simulated past the confirmation threshold.
    #[arg(long)]
    pub horizon: Option<String>,
    /// Seconds of pre-mining before the attack.
    #[arg(long)]
    pub warmup: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::sim::DEFAULT_STOP_MARGIN)]
    pub stop_margin: u64,
    /// warmup, geometric or zero.
    #[arg(long, default_value = "warmup")]
    pub lead_dist: LeadDist,
    /// Depths for attack-depth.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u64>,
    /// Times in seconds for attack-time.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Bounds to evaluate, one column each; all depth or all time.
    #[arg(long, required = true, value_delimiter = ',')]
    pub kind: Vec<BoundKind>,
    /// start:stop:count, or start:stop:count:log.
    #[arg(long)]
    pub grid: String,
    /// Sweep these β at the given --lambda instead of a single point.
    #[arg(long, value_delimiter = ',')]
    pub betas: Vec<String>,
    #[arg(long, default_value = "canonical")]
    pub variant: Variant,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Result file (CSV or JSON) or key=value config file.
    pub file: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on usage errors, 2 on domain errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
