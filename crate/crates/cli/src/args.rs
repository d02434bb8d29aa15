use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "spherecover", version, about = "Sphere coverings by equal spherical caps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the parameter set for one (n, r, mode).
    Params(ParamsArgs),
    /// CSV table of density bounds and certificates over a range of n.
    Bounds(BoundsArgs),
    /// Build a covering, verify it and write the covering and reports.
    Cover(CoverArgs),
    /// Run the inequality, moderation and small-cap checks.
    Lemma(LemmaArgs),
    /// Compare the exact cap fraction with a Monte Carlo estimate.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    V1,
    V2,
    Asymptotic,
    Engineering,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

/// Schedule selection shared by several subcommands.
#[derive(Args, Debug, Clone)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::V2)]
    pub mode: ModeArg,
    /// Exponent b > 3/2 (asymptotic and engineering modes).
    #[arg(long)]
    pub b: Option<f64>,
    /// Engineering mode: net half-chord eps.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Engineering mode: small-cap half-chord mu.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Engineering mode: force the number of random caps.
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n_from: usize,
    #[arg(long)]
    pub n_to: usize,
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    /// Constant of the lower bound c1 n.
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Sphere radius for the schedule behind the certificates.
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    /// Also report the first n in [n-from, this] where d-sph < est0.
    #[arg(long)]
    pub crossover_to: Option<usize>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Two-level when the schedule has mu, embedded otherwise.
    Auto,
    Embedded,
    TwoLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NetKind {
    /// Centers of the eps base covering, margin = its half-angle.
    Eps,
    /// Cube-facet grid whose covering angle is the eps half-angle.
    Grid,
}

#[derive(Args, Debug)]
pub struct CoverArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Algorithm::Auto)]
    pub algorithm: Algorithm,
    /// Failure probability for random base coverings.
    #[arg(long, default_value_t = 1e-3)]
    pub fail_prob: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: u64,
    /// Net used for the coverage certificate.
    #[arg(long, value_enum, default_value_t = NetKind::Eps)]
    pub net: NetKind,
    /// Load the eps base covering instead of generating it.
    #[arg(long)]
    pub eps_net: Option<PathBuf>,
    /// Load the mu base covering instead of generating it.
    #[arg(long)]
    pub mu_net: Option<PathBuf>,
    /// Also write the base coverings.
    #[arg(long)]
    pub save_net: bool,
    /// Verify this covering file instead of constructing one.
    #[arg(long)]
    pub verify_only: Option<PathBuf>,
    #[arg(long, env = "SPHERECOVER_OUT", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct LemmaArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Angle between the big and small cap centers; default is the
    /// d-close extreme.
    #[arg(long)]
    pub placement_angle: Option<f64>,
    #[arg(long, default_value_t = 8.0)]
    pub moderation_from: f64,
    #[arg(long, default_value_t = 100.0)]
    pub moderation_to: f64,
    #[arg(long, default_value_t = 1000)]
    pub moderation_points: usize,
    /// Write the small-cap report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest accepted |estimate - theta| in binomial standard deviations.
    #[arg(long, default_value_t = 3.0)]
    pub sigmas: f64,
}
