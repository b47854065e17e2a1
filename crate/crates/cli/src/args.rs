use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const DEFAULT_MAX_N: usize = 5000;

#[derive(Debug, Parser)]
#[command(name = "hawkes-branch", version, about = "Hawkes process EM with Bregman-ADMM event-branch structuring")]
pub struct Cli {
    /// JSON file with default option values; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate sequences (and ground-truth parents) from a parameter file.
    Simulate(SimulateArgs),
    /// Fit Hawkes parameters by EM, optionally with BADMM-structured responsibilities.
    Fit(FitArgs),
    /// Structure a single transition matrix with BADMM.
    Infer(InferArgs),
    /// Compute ELL/ACC and, given labels, parent-recovery metrics.
    Eval(EvalArgs),
    /// Rank event types by total influence 1ᵀBS.
    Rank(RankArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reg {
    Nuclear,
    Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Branching,
    Thinning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    None,
    Dense,
    Triplet,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub sequences: Option<usize>,
    /// Observation horizon T of every sequence.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Abort a sequence once it exceeds this many events.
    #[arg(long)]
    pub max_events: Option<usize>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct BadmmFlags {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_enum)]
    pub reg: Option<Reg>,
    #[arg(long)]
    pub badmm_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sequence file (JSON lines).
    #[arg(long)]
    pub data: PathBuf,
    /// Type map resolving string labels to indices.
    #[arg(long)]
    pub types: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub num_types: Option<usize>,
    #[command(flatten)]
    pub badmm: BadmmFlags,
    /// Comma-separated λ values; one fit per value.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[arg(long)]
    pub badmm_tol: Option<f64>,
    #[arg(long)]
    pub em_iters: Option<usize>,
    /// Relative log-likelihood tolerance of EM.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Recorded in the manifest; fitting itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Also store the final responsibilities.
    #[arg(long, value_enum)]
    pub responsibilities: Option<Layout>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Prior transition matrix (dense or triplet).
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub badmm: BadmmFlags,
    /// Primal residual tolerance; 0 runs exactly --badmm-iters iterations.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Fit result written by `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub types: Option<PathBuf>,
    /// Ground-truth parents written by `simulate`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub max_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// JSON array with the type index of every event (row) of the matrix.
    #[arg(long = "event-types")]
    pub event_types: PathBuf,
    /// Output TSV file.
    #[arg(long)]
    pub out: PathBuf,
}

/// Option values read from `--config`. Keys mirror the long flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub sequences: Option<usize>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub method: Option<Method>,
    pub max_events: Option<usize>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub reg: Option<Reg>,
    pub badmm_iters: Option<usize>,
    pub badmm_tol: Option<f64>,
    pub lambda_grid: Option<String>,
    pub em_iters: Option<usize>,
    pub tol: Option<f64>,
    pub beta: Option<f64>,
    pub max_n: Option<usize>,
    pub responsibilities: Option<Layout>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::validation(format!("line {}: {e}", e.line())).in_file(path))
    }
}

impl BadmmFlags {
    /// Flags first, then the config file.
    pub fn merged(&self, file: &FileConfig) -> Self {
        Self {
            lambda: self.lambda.or(file.lambda),
            alpha: self.alpha.or(file.alpha),
            rho: self.rho.or(file.rho),
            reg: self.reg.or(file.reg),
            badmm_iters: self.badmm_iters.or(file.badmm_iters),
        }
    }

    pub fn any(&self) -> bool {
        self.lambda.is_some() || self.alpha.is_some() || self.rho.is_some() || self.reg.is_some() || self.badmm_iters.is_some()
    }
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| Failure::validation(format!("--lambda-grid entry `{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| if v.is_empty() { Err(Failure::validation("--lambda-grid is empty")) } else { Ok(v) })
}
