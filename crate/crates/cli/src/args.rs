use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hoa", version, about = "Higher-order likelihood inference for a scalar interest parameter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum likelihood fit.
    Fit(FitArgs),
    /// Significance curve over a grid of interest values.
    Signif(SignifArgs),
    /// First-order and higher-order confidence intervals.
    Ci(CiArgs),
    /// Monte-Carlo coverage of the significance functions.
    Coverage(CoverageArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Catalog id or path to a JSON model document `{id, hyper, data}`.
    #[arg(long)]
    pub model: Option<String>,
    /// Hyperparameters as `key=value,...`; override those in the document.
    #[arg(long)]
    pub hyper: Option<String>,
    /// Data file: JSON array, JSON model document, or numbers separated by
    /// whitespace or commas.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SignifArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `lo:hi:count` with count >= 8, or `auto`.
    #[arg(long, default_value = "auto")]
    pub psi_grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `lo:hi:count` with count >= 8, or `auto`.
    #[arg(long, default_value = "auto")]
    pub psi_grid: String,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Significance curve CSV written by `signif`; with a model the endpoints
    /// are re-solved exactly, otherwise interpolated from the stored points.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// True parameter as `v1,v2,...`.
    #[arg(long)]
    pub true_theta: String,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Coverage levels as `l1,l2,...`.
    #[arg(long, default_value = "0.9,0.95,0.99")]
    pub level: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional CSV of per-replicate p-values.
    #[arg(long)]
    pub pvalues: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}
