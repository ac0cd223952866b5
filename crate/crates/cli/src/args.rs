use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpm_core::GroupSpec;

#[derive(Debug, Parser)]
#[command(
    name = "qpm",
    version,
    about = "Linear-optical swap tests of order M: exact photon statistics, verification and sampling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-pattern probabilities, π(D) and the decision bit.
    Stats(StatsArgs),
    /// Run every consistency check for one interferometer.
    Verify(VerifyArgs),
    /// Beam-splitter network for the Hadamard interferometer.
    Decompose(DecomposeArgs),
    /// Seeded shots from the mixture distribution.
    Sample(SampleArgs),
    /// Compare the swap circuit, the interferometer and the closed form.
    Swapsim(SwapsimArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct InterferometerArgs {
    /// Number of modes: Hadamard if a power of two, cyclic QFT otherwise.
    #[arg(
        long,
        value_name = "M",
        conflicts_with = "group",
        required_unless_present = "group"
    )]
    pub size: Option<usize>,
    /// Invariant factors a1,a2,... with a1 | a2 | ...
    #[arg(long, value_name = "A1,A2,...")]
    pub group: Option<GroupSpec>,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Overlap c = |<phi|psi>|^2.
    #[arg(long, value_name = "C")]
    pub overlap: Option<f64>,
    /// State file for phi: one "re im" amplitude per line.
    #[arg(long, value_name = "FILE", requires = "psi")]
    pub phi: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "phi")]
    pub psi: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub interferometer: InterferometerArgs,
    #[command(flatten)]
    pub states: StateArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub interferometer: InterferometerArgs,
    /// Override every check tolerance.
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
    /// Add 1e-3 to entry (0,0) of the unitary; a negative control.
    #[arg(long)]
    pub perturb: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long, value_name = "M")]
    pub size: usize,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub interferometer: InterferometerArgs,
    #[command(flatten)]
    pub states: StateArgs,
    #[arg(long, value_name = "N")]
    pub shots: usize,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SwapsimArgs {
    #[arg(long, value_name = "M")]
    pub size: usize,
    #[arg(long, value_name = "FILE", requires = "psi")]
    pub phi: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "phi")]
    pub psi: Option<PathBuf>,
    /// Local dimension of randomly drawn states.
    #[arg(long, value_name = "D", default_value_t = 2, conflicts_with = "phi")]
    pub dim: usize,
    /// Seed for randomly drawn states.
    #[arg(long, value_name = "S", conflicts_with = "phi")]
    pub seed: Option<u64>,
    /// Agreement tolerance.
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}
