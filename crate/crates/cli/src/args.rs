//! Command-line and config-file options.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "dee", version, about = "Estimate diagonal entries of powers of sparse symmetric matrices")]
pub struct Cli {
    /// TOML file with option defaults; flags win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads. Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Add wall-clock time to the report.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide an instance by sampling phase-estimation outcomes.
    Estimate(EstimateArgs),
    /// Exact entry of A^m from the sparse power oracle.
    Exact(ExactArgs),
    /// Turn a circuit and input into an estimation instance.
    Reduce(ReduceArgs),
    /// Check the estimator's error bounds on random instances.
    VerifyBounds(VerifyArgs),
    /// Count closed walks in a graph, exactly and by estimation.
    Paths(PathsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    Analytic,
    Statevector,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Matrix file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Row index; estimates (A^m)_{ij} when --i is also given.
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Threshold.
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Norm bound; defaults to the Gershgorin bound.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Qubit cap of the statevector backend.
    #[arg(long)]
    pub qubit_cap: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub fail_prob: Option<f64>,
    /// CSV of samples (a, z, z^m).
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long)]
    pub m: Option<u32>,
    /// CSV of the spectral measure at e_j.
    #[arg(long)]
    pub measure_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Circuit file.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Input bits, qubit 0 first; remaining qubits are ancillas.
    #[arg(long)]
    pub input: Option<String>,
    /// Build the {-1, 0, 1} observable over Toffoli + Hadamard.
    #[arg(long)]
    pub integer: bool,
    #[arg(long)]
    pub out_matrix: Option<PathBuf>,
    #[arg(long)]
    pub out_meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random matrices per check.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Control qubits for the phase checks (4..=10).
    #[arg(long)]
    pub p: Option<u32>,
    /// Injected simulation errors.
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct PathsArgs {
    /// Edge-list file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub fail_prob: Option<f64>,
}

/// Values a config file may set. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub matrix: Option<PathBuf>,
    pub circuit: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub input: Option<String>,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub m: Option<u32>,
    pub epsilon: Option<f64>,
    pub g: Option<f64>,
    pub b: Option<f64>,
    pub backend: Option<BackendArg>,
    pub qubit_cap: Option<u32>,
    pub seed: Option<u64>,
    pub fail_prob: Option<f64>,
    pub trials: Option<usize>,
    pub p: Option<u32>,
    pub delta: Option<Vec<f64>>,
    pub threads: Option<usize>,
    pub samples_csv: Option<PathBuf>,
    pub measure_csv: Option<PathBuf>,
    pub out_matrix: Option<PathBuf>,
    pub out_meta: Option<PathBuf>,
    pub integer: Option<bool>,
}
