use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "infocap",
    version,
    about = "Guessing probability and information bounds for prepare-and-measure assumptions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a closed-form bound over a parameter grid.
    Bound(BoundArgs),
    /// Optimize the guessing probability of an ensemble file.
    Oracle(OracleArgs),
    /// Dual certificate for an ensemble and a measurement.
    Certify(CertifyArgs),
    /// Search for ensembles that reach a bound.
    Search(SearchArgs),
    /// Bound (and optionally oracle) values along one parameter axis.
    Sweep(SweepArgs),
    /// Run the reproduction checks and print a pass/fail table.
    PaperNumbers(PaperNumbersArgs),
    /// Shared-randomness report for a strategy file or the built-in example.
    SrDemo(SrDemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Dimension,
    EaDimension,
    Vacuum,
    Overlap,
    AlmostDim,
    Distrust,
    Information,
    Coherent,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Dimension => "dimension",
            Kind::EaDimension => "ea_dimension",
            Kind::Vacuum => "vacuum",
            Kind::Overlap => "overlap",
            Kind::AlmostDim => "almost_dim",
            Kind::Distrust => "distrust",
            Kind::Information => "information",
            Kind::Coherent => "coherent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Assumption parameters. Every numeric flag takes a comma-separated list;
/// commands that need a single value reject longer lists.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Number of inputs.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Dimension.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
    /// Vacuum parameter.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub omega: Vec<f64>,
    /// Pairwise overlap.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a: Vec<f64>,
    /// Weight allowed outside the subspace or target.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eps: Vec<f64>,
    /// Information budget in bits.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    /// Mean photon number of coherent states.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub mean_photons: Vec<f64>,
    /// JSON list of target kets (`[[[re, im], ...], ...]`) for distrust.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// Use real equiangular targets with this overlap for distrust.
    #[arg(long, conflicts_with = "targets")]
    pub target_overlap: Option<f64>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct OracleFlags {
    /// Convergence tolerance of the discrimination oracle.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Random restarts of the oracle when the first run does not converge.
    #[arg(long, default_value_t = 0)]
    pub oracle_restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub oracle: OracleFlags,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Ensemble JSON file.
    pub ensemble: PathBuf,
    #[command(flatten)]
    pub oracle: OracleFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the optimal measurement as JSON.
    #[arg(long)]
    pub povm_out: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Ensemble JSON file.
    pub ensemble: PathBuf,
    /// Measurement JSON file.
    pub povm: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Size of the random perturbation for restarts after the first.
    #[arg(long, default_value_t = 0.3)]
    pub perturbation: f64,
    /// Oracle / state-update rounds per restart.
    #[arg(long, default_value_t = 8)]
    pub rounds: usize,
    #[command(flatten)]
    pub oracle: OracleFlags,
    /// Write the best ensemble found as JSON.
    #[arg(long)]
    pub best_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    /// Parameter swept: omega, a, eps, alpha or mean_photons.
    #[arg(long)]
    pub axis: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Add the oracle value of a saturating construction at each point.
    #[arg(long)]
    pub with_oracle: bool,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub oracle: OracleFlags,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PaperNumbersArgs {
    /// Run only checks whose name contains this string.
    #[arg(long)]
    pub only: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SrDemoArgs {
    /// Strategy JSON file; the built-in dense-coding example is used otherwise.
    #[arg(long)]
    pub strategy: Option<PathBuf>,
    #[command(flatten)]
    pub oracle: OracleFlags,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
