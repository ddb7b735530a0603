use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "flowmetric", version, about = "Metrics turning a vector field into a given co-vector field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a global metric from a field spec and verify it on a grid.
    Build(BuildArgs),
    /// Re-verify a stored metric on a grid.
    Verify(VerifyArgs),
    /// Check the entropy gradient-flow structure of a Lindblad generator.
    Qms(QmsArgs),
    /// Directional derivatives of the continuous extension for X = Y = x.
    Counterexample(CounterexampleArgs),
    /// Run a small built-in battery of end-to-end checks.
    Selftest(SelftestArgs),
}

/// Flags shared by every subcommand. Unset flags fall back to `--config`,
/// then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML file with default values for the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for sampled directions and states.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Field spec (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the serialised global metric.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the report; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Highest series coefficient at critical points.
    #[arg(long)]
    pub order: Option<usize>,
    /// Grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol_residual: Option<f64>,
    /// CSV dump of the metric on the grid.
    #[arg(long)]
    pub emit_csv: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Metric written by `build --output`.
    #[arg(long)]
    pub input: PathBuf,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol_residual: Option<f64>,
    #[arg(long)]
    pub emit_csv: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct QmsArgs {
    /// Generator spec (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also build the metric series on the state space around σ.
    #[arg(long)]
    pub simplex: bool,
    /// Series order for `--simplex`.
    #[arg(long)]
    pub order: Option<usize>,
    /// Interior states sampled for entropy production.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CounterexampleArgs {
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Sample points per ray.
    #[arg(long)]
    pub grid: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}
