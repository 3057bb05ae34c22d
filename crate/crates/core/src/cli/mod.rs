//! Batch command-line front end.
//!
//! Every command reads an instance (from a file or a named family), runs one
//! experiment and writes a table (see [`output`]). Exit codes: 0 success,
//! 1 parse or validation failure, 2 degenerate instance, 3 violated invariant.

pub mod commands;
pub mod instance;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use commands::{run_command, CommandOutput};
pub use instance::{load_instance, parse_instance, write_instance, LoadedInstance};
pub use output::Format;

#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "qbai", version, about = "Quantum best arm identification laboratory")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Root seed; per-trial streams are derived as (seed, trial index).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// State-vector simulation: P_n(x) for n = 0..=n.
    Simulate(SimulateArgs),
    /// Closed-form P_n(x) for n = 0..=n.
    Analytic(AnalyticArgs),
    /// Monte Carlo UCB-E error estimates against the classical bound.
    Ucbe(UcbeArgs),
    /// Matched-confidence classical vs quantum round counts.
    Compare(CompareArgs),
    /// Comparison sweep over a family of instances.
    Scale(ScaleArgs),
    /// Closed form vs simulation for n = 0..=n-max.
    Validate(ValidateArgs),
    /// Write a family instance in the instance-file format.
    Generate(GenerateArgs),
}

/// Either `--instance FILE` or `--family SPEC --arms N`.
#[derive(Clone, Debug, Args, Serialize)]
pub struct InstanceArgs {
    #[arg(long, conflicts_with_all = ["family", "arms"])]
    pub instance: Option<PathBuf>,

    /// `one-good-arm[:best]` or `two-level:best:rest`.
    #[arg(long, requires = "arms")]
    pub family: Option<String>,

    #[arg(long, requires = "family")]
    pub arms: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReflectionFlag {
    #[default]
    Composite,
    Tensor,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BonusFlag {
    #[default]
    PerArm,
    Printed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseFlag {
    #[default]
    Real,
    Random,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: InstanceArgs,

    /// Largest iteration count; defaults to n_star.
    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long, value_enum, default_value_t = ReflectionFlag::Composite)]
    pub reflection: ReflectionFlag,

    #[arg(long, value_enum, default_value_t = PhaseFlag::Real)]
    pub phases: PhaseFlag,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub source: InstanceArgs,

    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct UcbeArgs {
    #[command(flatten)]
    pub source: InstanceArgs,

    /// Budgets T, comma separated.
    #[arg(long = "rounds", short = 'T', value_delimiter = ',', required = true)]
    pub rounds: Vec<usize>,

    #[arg(long, default_value_t = 1000)]
    pub trials: usize,

    /// Exploration parameter; defaults to (25/36)(T - N)/H1 for each T.
    #[arg(long)]
    pub explore: Option<f64>,

    #[arg(long, value_enum, default_value_t = BonusFlag::PerArm)]
    pub bonus: BonusFlag,

    /// Emit one row per episode instead of aggregates.
    #[arg(long)]
    pub traces: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: InstanceArgs,

    /// Instances with N*M above this skip the simulation cross-check.
    #[arg(long, default_value_t = crate::hilbert::DENSE_CAP)]
    pub sim_cap: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ScaleArgs {
    #[arg(long, default_value = "one-good-arm")]
    pub family: String,

    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16, 32, 64, 128, 256, 512, 1024])]
    pub sizes: Vec<usize>,

    #[arg(long, default_value_t = crate::hilbert::DENSE_CAP)]
    pub sim_cap: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: InstanceArgs,

    #[arg(long, default_value_t = 50)]
    pub n_max: usize,

    /// Largest accepted deviation.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, default_value = "one-good-arm")]
    pub family: String,

    #[arg(long)]
    pub arms: usize,

    /// Include explicit uniform amplitudes.
    #[arg(long)]
    pub with_alpha: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Analytic(_) => "analytic",
            Command::Ucbe(_) => "ucbe",
            Command::Compare(_) => "compare",
            Command::Scale(_) => "scale",
            Command::Validate(_) => "validate",
            Command::Generate(_) => "generate",
        }
    }
}
