use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "fock",
    version,
    about = "Matrix-free Fock-space operator engine",
    after_help = "Exit codes: 0 ok, 1 usage, 2 parse, 3 no convergence, 4 step failure.\n\
                  Worker count: --workers, else FOCK_WORKERS, else 1."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank and unrank configurations.
    Enum(EnumArgs),
    /// Lowest eigenpair of the operator in an integral file.
    Gs(GsArgs),
    /// Real-time propagation.
    Prop(PropArgs),
    /// Apply the operator once to a stored vector.
    Apply(ApplyArgs),
}

/// Statistics and sizes. With `--mix`, `-N/-M` describe species A and
/// `-NB/-MB` species B.
#[derive(Debug, Args, Default)]
#[command(group(ArgGroup::new("statistics").args(["fermion", "boson", "mix"])))]
pub struct SpaceArgs {
    #[arg(long)]
    pub fermion: bool,
    #[arg(long)]
    pub boson: bool,
    #[arg(long)]
    pub mix: bool,
    /// Particle number.
    #[arg(short = 'N', long = "particles")]
    pub particles: Option<usize>,
    /// Orbital count.
    #[arg(short = 'M', long = "orbitals")]
    pub orbitals: Option<usize>,
    /// Species B particle number (also `-NB`).
    #[arg(long = "nb")]
    pub particles_b: Option<usize>,
    /// Species B orbital count (also `-MB`).
    #[arg(long = "mb")]
    pub orbitals_b: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("query").required(true).args(["holes", "occ", "address", "all"])))]
pub struct EnumArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// 1-based hole positions of a fermion configuration, e.g. `2,6,8`.
    #[arg(long, value_delimiter = ',')]
    pub holes: Option<Vec<usize>>,
    /// Configuration literal: `2,0,0` or `1100`.
    #[arg(long)]
    pub occ: Option<String>,
    /// Address to unrank.
    #[arg(short = 'J', long = "address")]
    pub address: Option<u64>,
    /// List every configuration.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Integral file.
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Cross-check against dense linear algebra.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GsArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 5000)]
    pub max_iter: usize,
    /// Include the one- and two-body density matrices.
    #[arg(long)]
    pub densities: bool,
    /// Write the ground-state vector here.
    #[arg(long = "save-state")]
    pub save_state: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("initial").required(true).args(["init", "state"])))]
pub struct PropArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Initial configuration literal: `1100`, `2,0,0`, or `A/B` for mixtures.
    #[arg(long)]
    pub init: Option<String>,
    /// Initial vector file.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Output interval.
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long = "t-final", default_value_t = 1.0)]
    pub t_final: f64,
    #[arg(long = "krylov-dim", default_value_t = 15)]
    pub krylov_dim: usize,
    /// Local error bound per Krylov step.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Write the final vector here.
    #[arg(long = "final-state")]
    pub final_state: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Input vector file.
    #[arg(long)]
    pub input: PathBuf,
}

/// clap takes single-character short flags only, so the two-letter
/// species-B spellings are rewritten to their long forms.
pub fn normalize_argv(args: impl IntoIterator<Item = String>) -> Vec<String> {
    args.into_iter()
        .map(|a| {
            for (short, long) in [("-NB", "--nb"), ("-MB", "--mb")] {
                if a == short {
                    return long.to_string();
                }
                if let Some(rest) = a.strip_prefix(short).and_then(|r| r.strip_prefix('=')) {
                    return format!("{long}={rest}");
                }
            }
            a
        })
        .collect()
}
