use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "affine-pa", version, about = "Affine preferential attachment: simulation and inference for delta")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one network and write its sufficient statistics.
    Simulate(SimulateArgs),
    /// Estimate delta from a simulated (or imported) network.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo study of the estimators.
    Mc(McArgs),
    /// Tabulate the limiting degree law and the variance constants.
    Limit(LimitArgs),
}

/// Initial-degree law: a constant `--m` or a pmf file.
#[derive(Debug, Clone, Args)]
pub struct DegreeArgs {
    /// Constant initial degree m.
    #[arg(long, conflicts_with = "pmf_file")]
    pub m: Option<u32>,
    /// CSV file of `k,prob` rows giving the initial-degree law.
    #[arg(long, value_name = "FILE")]
    pub pmf_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Final time index; the network has n + 1 vertices.
    #[arg(long)]
    pub n: usize,
    /// Affine parameter, delta > -1.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    #[command(flatten)]
    pub degrees: DegreeArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// RNG stream within the seed.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Also store every attachment (t, i, target, degree before the draw).
    #[arg(long)]
    pub record_history: bool,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Parameter set as `lo,hi` with -1 < lo < hi.
    #[arg(long, allow_hyphen_values = true, value_name = "LO,HI")]
    pub bracket: Option<String>,
    /// Tolerance on delta and on the score at the root.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Confidence intervals have level 1 - alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Smallest degree in the log-log fit (default: smallest occupied degree).
    #[arg(long)]
    pub k_min: Option<usize>,
    /// Largest degree in the log-log fit (default: largest occupied degree).
    #[arg(long)]
    pub k_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Directory holding `stats.json`, or a `stats.json` / `histogram.csv` file.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// One of mle, mle-fixed-m, qmle, loglog.
    #[arg(long)]
    pub estimator: String,
    /// Known initial-degree law (required by qmle).
    #[arg(long, value_name = "FILE")]
    pub pmf_file: Option<PathBuf>,
    /// Constant initial degree for mle-fixed-m (default: edges / n).
    #[arg(long)]
    pub m: Option<u32>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Report file (default: `estimate-<estimator>.json` next to the input).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// TOML file of flat `key = value` pairs named like these flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub degrees: DegreeArgs,
    /// Comma-separated subset of mle, mle-fixed-m, qmle, loglog.
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    /// Replicate r uses RNG stream (base_seed, r).
    #[arg(long)]
    pub base_seed: Option<u64>,
    /// Worker threads; 0 means one per core. Defaults to $AFFINE_PA_WORKERS.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Histogram bins (default: Freedman-Diaconis).
    #[arg(long)]
    pub bins: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    #[command(flatten)]
    pub degrees: DegreeArgs,
    /// Truncate once the remaining mass p_{>K} is below this.
    #[arg(long, default_value_t = affine_pa::degree_law::DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
    /// Number of p_k values to print, from the smallest initial degree up.
    #[arg(long, default_value_t = 10)]
    pub show: usize,
    /// Output directory for `limit_law.csv`, `limit.json` and the manifest.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}
