//! Command-line configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "qlb", version, about = "Quantum query lower-bound experiments for Boolean functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate oracle interrogation of an input string.
    Vandam(VandamArgs),
    /// Spectral norm of the truncated Fourier operator.
    Norm(NormArgs),
    /// Lower-bound certificates from the norm threshold.
    Certify(CertifyArgs),
    /// Trace moments and their expectations over random functions.
    Moments(MomentsArgs),
    /// Norm scaling of random functions across n.
    #[command(name = "claim1-sweep")]
    Claim1Sweep(Claim1Args),
    /// Exhaustive partition sums over low-weight string tuples.
    #[command(name = "claim2-verify")]
    Claim2Verify(Claim2Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Vandam(_) => "vandam",
            Command::Norm(_) => "norm",
            Command::Certify(_) => "certify",
            Command::Moments(_) => "moments",
            Command::Claim1Sweep(_) => "claim1-sweep",
            Command::Claim2Verify(_) => "claim2-verify",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Vandam(a) => &a.output,
            Command::Norm(a) => &a.output,
            Command::Certify(a) => &a.output,
            Command::Moments(a) => &a.output,
            Command::Claim1Sweep(a) => &a.output,
            Command::Claim2Verify(a) => &a.output,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for trial-parallel subcommands.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

/// Which function to analyse: a named family, a truth-table file, or
/// (when neither is given) a uniform sample drawn from `--seed`.
#[derive(Debug, Clone, Args)]
pub struct FunctionArgs {
    #[arg(long, conflicts_with = "function_file")]
    pub family: Option<String>,
    #[arg(long)]
    pub function_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ModeArgs {
    #[arg(long, conflicts_with = "matrix_free")]
    pub dense: bool,
    #[arg(long)]
    pub matrix_free: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct VandamArgs {
    #[arg(long)]
    pub n: u32,
    /// Query budget; chosen from --eps when absent.
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Input string, most significant bit first.
    #[arg(long)]
    pub x: String,
    /// Report the exact success probability instead of sampling.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// Truncation level; every T in 0..=n when absent.
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub function: FunctionArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub eps: f64,
    /// Random functions to certify when no family or file is given.
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replace trial 0 of a random sweep with this family.
    #[arg(long)]
    pub include_family: Option<String>,
    #[arg(long)]
    pub binary_search: bool,
    #[command(flatten)]
    pub function: FunctionArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomentsMethodArg {
    Dense,
    Exhaustive,
    Mc,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub t: u32,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, value_enum, default_value = "mc")]
    pub method: MomentsMethodArg,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub function: FunctionArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Claim1Args {
    /// Comma-separated list of n values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<u32>,
    /// T = floor(t_rule * n).
    #[arg(long, default_value_t = 0.4)]
    pub t_rule: f64,
    #[arg(long, default_value_t = 50)]
    pub trials: u64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub eps: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also report one named family per n.
    #[arg(long)]
    pub include_family: Option<String>,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Claim2Args {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub t: u32,
    /// Partition of 1..m as `1,2|3,4`.
    #[arg(long, conflicts_with = "m")]
    pub parts: Option<String>,
    /// Use the single-part partition of 1..m.
    #[arg(long)]
    pub m: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}
