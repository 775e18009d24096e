use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "bmlab", version, about = "Hermite expansions, long-memory Gaussian simulation and Monte Carlo checks of partial-sum limit theorems")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Experiment config (JSON). Supplies defaults for every subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fail instead of overriding a normalization that contradicts the regime.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads. Results are identical for every value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log level: -v info, -vv debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hermite expansion of a function, as JSON.
    Expand(FunctionArgs),
    /// Limiting variance with its tail bound.
    Sigma {
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        covariance: CovarianceArgs,
        #[arg(long)]
        lag_cutoff: Option<usize>,
    },
    /// Terms and partial sum of the Ben Hariz series.
    Criterion {
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        covariance: CovarianceArgs,
        /// Radius R > 1.
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long)]
        lag_cutoff: Option<usize>,
    },
    /// Writes Gaussian paths to disk (little-endian f64 plus a JSON sidecar).
    Simulate {
        #[command(flatten)]
        covariance: CovarianceArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        replications: u64,
    },
    /// Finite-dimensional distribution checks on fresh or stored paths.
    VerifyFdd(VerifyArgs),
    /// Moment tightness diagnostic on fresh or stored paths.
    VerifyTightness(VerifyArgs),
    /// Randomized check of the exact chaos identities.
    ChaosSelftest {
        #[arg(long, default_value_t = 500)]
        cases: usize,
    },
    /// Regime and normalization for a covariance and a Hermite rank.
    Regime {
        #[command(flatten)]
        covariance: CovarianceArgs,
        /// Hermite rank; taken from the function when omitted.
        #[arg(long)]
        rank: Option<usize>,
        #[command(flatten)]
        function: FunctionArgs,
    },
    /// Runs the experiment described by --config.
    Run,
}

#[derive(Debug, Args, Default)]
pub struct FunctionArgs {
    /// Registry name: hermite:q, poly:[a0,a1,..], sign, abs-centered, cube, indicator:a.
    #[arg(long, conflicts_with = "expansion")]
    pub function: Option<String>,
    /// Expansion JSON file as written by `expand`.
    #[arg(long)]
    pub expansion: Option<PathBuf>,
    #[arg(long)]
    pub truncation: Option<usize>,
    #[arg(long)]
    pub quad_order: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct CovarianceArgs {
    /// fgn, exponential, table or white.
    #[arg(long)]
    pub family: Option<String>,
    /// Hurst index for fgn.
    #[arg(long = "H")]
    pub hurst: Option<f64>,
    /// Decay for exponential: rho(k) = a^|k|.
    #[arg(long)]
    pub a: Option<f64>,
    /// Comma-separated rho(0), rho(1), .. for table.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Directory of stored paths from `simulate`; fresh paths from --config otherwise.
    #[arg(long)]
    pub paths: Option<PathBuf>,
    #[command(flatten)]
    pub function: FunctionArgs,
}
