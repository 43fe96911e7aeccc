use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "blockade",
    version,
    about = "Constrained-chain spectra, entanglement and 2-SAT subspaces"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "BLOCKADE_OUT_DIR", default_value = "blockade-out")]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads; overrides the config file. 0 uses every core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file with tolerances and caps.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate a clause file's solutions, build the Hamming graph and run the median test.
    Space(SpaceArgs),
    /// Floquet quasi-energies, spacing statistics and histogram of the driven clock chain.
    Spectrum(SpectrumArgs),
    /// Half-cut entropy and local X of every Floquet eigenstate.
    EntropySweep(SweepArgs),
    /// Build and certify a constraint set from a coefficient sparsity pattern.
    Construct(ConstructArgs),
    /// Closed-form spectrum and half-cut entropies of the undriven hopping chain.
    Oracle(OracleArgs),
    /// Wave-packet dynamics in a static linear tilt.
    Bloch(BlochArgs),
    /// Static walk Hamiltonian of a clause file as a sparse CSV.
    Hamiltonian(HamiltonianArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Space(_) => "space",
            Command::Spectrum(_) => "spectrum",
            Command::EntropySweep(_) => "entropy-sweep",
            Command::Construct(_) => "construct",
            Command::Oracle(_) => "oracle",
            Command::Bloch(_) => "bloch",
            Command::Hamiltonian(_) => "hamiltonian",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SpaceArgs {
    /// Clause file: `vars N` then one `i j PATTERN` per line.
    pub constraints: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DriveArgs {
    /// Drive frequency.
    #[arg(long, default_value_t = 0.9071)]
    pub omega: f64,
    /// Hold J, A and φ fixed instead of the standard time-dependent drive.
    #[arg(long)]
    pub constant_drive: bool,
    /// Hopping amplitude of the constant drive.
    #[arg(long, default_value_t = 1.0, requires = "constant_drive")]
    pub j: f64,
    /// Tilt of the constant drive.
    #[arg(long, default_value_t = 0.0, requires = "constant_drive")]
    pub a: f64,
    /// Hopping phase of the constant drive.
    #[arg(long, default_value_t = 0.0, requires = "constant_drive")]
    pub phi: f64,
    /// Key-value drive file (`drive`, `omega`, `j`, `a`, `phi`); replaces the flags above.
    #[arg(long, conflicts_with_all = ["constant_drive", "omega"])]
    pub drive_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PropagationArgs {
    /// Time steps per period; overrides the config file.
    #[arg(long)]
    pub steps: Option<usize>,
    /// `cf4` or `midpoint`; overrides the config file.
    #[arg(long)]
    pub integrator: Option<String>,
    /// Double the step count until the propagator converges.
    #[arg(long)]
    pub converge: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    /// Chain length; the constrained space has N+1 states.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub drive: DriveArgs,
    #[command(flatten)]
    pub propagation: PropagationArgs,
    /// Also write the Floquet operator and eigenvectors as binary matrices.
    #[arg(long)]
    pub save_operator: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Even chain length.
    #[arg(long)]
    pub n: usize,
    /// Site of the local X observable, 1-based; defaults to N/4.
    #[arg(long)]
    pub site: Option<usize>,
    #[command(flatten)]
    pub drive: DriveArgs,
    #[command(flatten)]
    pub propagation: PropagationArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    /// Pattern file: `dims R C` then one `m n` cell per line.
    pub pattern: PathBuf,
    /// Even chain length with R = C = N/2 + 1.
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BlochArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Tilt per site.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    /// End time; defaults to two predicted periods, or 20 without tilt.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// `+Δ` per excitation.
    Positive,
    /// `-Δ` per excitation, as in the blockaded chain.
    Negative,
}

#[derive(Debug, Args, Serialize)]
pub struct HamiltonianArgs {
    pub constraints: PathBuf,
    /// Rabi frequency Ω; flips carry Ω/2.
    #[arg(long, default_value_t = 1.0)]
    pub rabi: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = Sign::Positive)]
    pub sign: Sign,
}
