//! Command-line surface. Every subcommand's arguments are also its record
//! in `manifest.json`, so a manifest replays the exact run.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Twelve seconds in years.
pub const DEFAULT_DT: f64 = 12.0 / 31_536_000.0;
pub const DEFAULT_SIGMA: f64 = 0.8;

#[derive(Debug, Parser)]
#[command(
    name = "paamm",
    version,
    about = "Experiments on partially active AMMs: simulation, stationary estimates and optimal activeness",
    long_about = "Experiments on partially active AMMs.\n\n\
Units: --sigma, --mu and --rho are annualized and --dt is in years (default 12 s = 12/31536000). \
Every run with --out DIR writes its data files plus DIR/manifest.json; `paamm rerun DIR/manifest.json --out OTHER` \
reproduces the files byte for byte.\n\n\
Exit codes: 0 success, 2 usage error, 3 input data or I/O error, 4 numerical failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Simulate pools along one seeded GBM path per activeness and write per-block metrics.
    Simulate(SimulateArgs),
    /// Estimate stationary moments of the top-of-block gap.
    Moments(MomentsArgs),
    /// Trace gap variance against LVR rate over a grid of activeness values.
    Frontier(FrontierArgs),
    /// Optimal activeness for an LVR weight, with an optional grid oracle check.
    OptimalLambda(OptimalLambdaArgs),
    /// Replay a historical `timestamp,price` file through pools.
    Replay(ReplayArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Where results go; not part of the recorded run.
#[derive(Debug, Clone, Default, Args)]
pub struct OutArgs {
    /// Directory for output files and manifest.json; stdout when absent.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PoolArgs {
    /// Activeness λ in (0, 1], or a comma-separated list.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0.5", allow_negative_numbers = true)]
    pub lambda: Vec<f64>,
    /// Risky-asset weight θ of the G3M, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Blocks between re-partitions of the reserves.
    #[arg(long, default_value_t = 1)]
    pub period: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GbmArgs {
    /// Annualized drift μ of the log price.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    /// Annualized volatility σ.
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    pub sigma: f64,
    /// Block time Δt in years.
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    /// RNG seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub pool: PoolArgs,
    #[command(flatten)]
    pub gbm: GbmArgs,
    /// Number of simulated blocks.
    #[arg(long, default_value_t = 10_000)]
    pub blocks: usize,
    /// Leading blocks excluded from the summary statistics.
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    /// Initial risky reserve; the quote reserve matches it at the initial price.
    #[arg(long, default_value_t = 1000.0)]
    pub initial_x: f64,
    /// Initial true and pool price.
    #[arg(long, default_value_t = 1.0)]
    pub initial_price: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub pool: PoolArgs,
    #[command(flatten)]
    pub gbm: GbmArgs,
    /// Post-burn-in samples.
    #[arg(long, default_value_t = 1_000_000)]
    pub blocks: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn_in: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub pool: PoolArgs,
    #[command(flatten)]
    pub gbm: GbmArgs,
    /// Post-burn-in samples per replication.
    #[arg(long, default_value_t = 1_000_000)]
    pub blocks: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn_in: usize,
    /// Independent paths per activeness, seeded seed, seed+1, ...; shared across the grid.
    #[arg(long, default_value_t = 1)]
    pub replications: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OptimalLambdaArgs {
    /// LVR weight γ ≥ 0.
    #[arg(long, default_value_t = 4.0)]
    pub gamma: f64,
    /// Annualized discount rate ϱ ≥ 0.
    #[arg(long, default_value_t = 0.05)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    pub sigma: f64,
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    /// Lower bound λ̲ on the activeness.
    #[arg(long, default_value_t = 0.05)]
    pub lambda_lower: f64,
    /// Also solve the Bellman equation on a grid and compare policies.
    #[arg(long)]
    pub oracle: bool,
    /// Oracle state grid points (made even).
    #[arg(long, default_value_t = 200)]
    pub states: usize,
    /// Oracle state grid half-width in stationary standard deviations.
    #[arg(long, default_value_t = 10.0)]
    pub std_devs: f64,
    /// Oracle action grid spacing in u = 1 - λ.
    #[arg(long, default_value_t = 0.005)]
    pub action_step: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Price file with `timestamp,price` lines; one line per block.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[command(flatten)]
    pub pool: PoolArgs,
    /// Block time in years, used for per-time rates.
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub initial_x: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// A manifest.json written by an earlier run.
    pub manifest: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Moments(_) => "moments",
            Command::Frontier(_) => "frontier",
            Command::OptimalLambda(_) => "optimal-lambda",
            Command::Replay(_) => "replay",
            Command::Rerun(_) => "rerun",
        }
    }

    pub fn out_mut(&mut self) -> &mut OutArgs {
        match self {
            Command::Simulate(a) => &mut a.out,
            Command::Moments(a) => &mut a.out,
            Command::Frontier(a) => &mut a.out,
            Command::OptimalLambda(a) => &mut a.out,
            Command::Replay(a) => &mut a.out,
            Command::Rerun(a) => &mut a.out,
        }
    }
}
