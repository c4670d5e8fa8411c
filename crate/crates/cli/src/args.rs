use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grf_core::FieldMode;

#[derive(Debug, Parser)]
#[command(name = "grf", version, about = "Aggregation dynamics on finite group rings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the flow and write a diagnostics CSV.
    Simulate(SimulateArgs),
    /// Classify a saved state against the equilibrium decomposition.
    Classify(ClassifyArgs),
    /// Print the Cayley table, square subgroups, cosets and nullities of a group.
    GroupInfo(GroupInfoArgs),
    /// Run the built-in invariant suites.
    Verify(VerifyArgs),
    /// Run a grid of couplings and trials.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for FieldMode {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => FieldMode::Real,
            FieldArg::Complex => FieldMode::Complex,
        }
    }
}

/// Integration flags shared by `simulate` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long = "t-final", default_value_t = 10.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    pub field: FieldArg,
    /// Project each agent back to the unit sphere after every step.
    #[arg(long)]
    pub renormalize: bool,
    #[arg(long = "record-every", default_value_t = 1)]
    pub record_every: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Group spec such as Z6, D4, S3, Z2xZ4 or @file:table.txt.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long = "n-agents")]
    pub n_agents: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[command(flatten)]
    pub run: RunArgs,
    /// Start from a saved state instead of random unit agents.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "snapshot-out")]
    pub snapshot_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Defaults to 1e-6 for simulated states and 1e-8 otherwise.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct GroupInfoArgs {
    #[arg(long)]
    pub group: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Ring,
    Dynamics,
    Equilibria,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub group: String,
    /// Inclusive grid `lo:hi:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: String,
    #[arg(long = "n-agents")]
    pub n_agents: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[command(flatten)]
    pub run: RunArgs,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}
