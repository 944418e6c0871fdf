//! Command-line arguments. Every setting is optional here so that a config
//! file can fill in whatever the command line leaves out.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "factorgibbs", version, about = "Gibbs sampling for Bayesian exploratory factor analysis")]
pub struct Cli {
    /// Plain-text `key = value` file; keys are long flag names.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a dataset from known loadings and uniquenesses.
    Simulate(SimulateArgs),
    /// Run a Gibbs chain on a dataset and store posterior draws.
    Fit(FitArgs),
    /// Check the chi-square law of the prior diagonal of beta beta' by Monte Carlo.
    PriorCheck(PriorCheckArgs),
    /// Compare posteriors of Sigma on a dataset and on its column permutation.
    InvarianceStudy(StudyArgs),
    /// Re-run a command from its manifest into a new output directory.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct PriorArgs {
    /// `standard` or `order-invariant`.
    #[arg(long)]
    pub prior: Option<String>,
    /// Prior variance of the loadings.
    #[arg(long)]
    pub c0: Option<f64>,
    /// Inverse-gamma degrees of freedom of the uniquenesses.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Inverse-gamma scale of the uniquenesses.
    #[arg(long)]
    pub s2: Option<f64>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct ChainArgs {
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long = "iters")]
    pub iterations: Option<u64>,
    #[arg(long)]
    pub thin: Option<u64>,
    /// Chain seed; falls back to FACTORGIBBS_SEED.
    #[arg(long, env = "FACTORGIBBS_SEED")]
    pub seed: Option<u64>,
    /// Burn-in 10000 and 300000 iterations unless set explicitly.
    #[arg(long)]
    pub paper_scale: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Built-in truth, e.g. `paper-sim-1`.
    #[arg(long, conflicts_with_all = ["beta0", "omega0"])]
    pub truth: Option<String>,
    /// Loadings CSV without header, one row per variable.
    #[arg(long, requires = "omega0")]
    pub beta0: Option<PathBuf>,
    /// Uniquenesses CSV without header, one value per line.
    #[arg(long, requires = "beta0")]
    pub omega0: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, env = "FACTORGIBBS_SEED")]
    pub seed: Option<u64>,
    /// Also write Ypi.csv: `paper-pi`, `identity` or a CSV of 1-based images.
    #[arg(long)]
    pub permute: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Dataset CSV with a header row.
    pub data: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// `sigma-diag`, `full-sigma` or `beta-omega`.
    #[arg(long)]
    pub store: Option<String>,
    /// `mle` or `prior`.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PriorCheckArgs {
    #[arg(long)]
    pub prior: Option<String>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, env = "FACTORGIBBS_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    /// Dataset CSV; omit to simulate from `--truth`.
    pub data: Option<PathBuf>,
    #[arg(long, conflicts_with = "data")]
    pub truth: Option<String>,
    /// Observations to simulate with `--truth`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed of the simulated dataset.
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// `paper-pi`, `identity` or a CSV of 1-based images.
    #[arg(long)]
    pub pi: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// KS test level.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub kde_points: Option<usize>,
    /// Also write the draws of both arms.
    #[arg(long)]
    pub save_draws: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A manifest.json written by an earlier run.
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
