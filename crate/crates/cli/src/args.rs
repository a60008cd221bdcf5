use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ingest::DEFAULT_SHIFT;

#[derive(Debug, Parser)]
#[command(
    name = "sdd",
    version,
    about = "Simulate, describe and fit Spherical-Dirichlet distributions",
    after_help = "Exit codes: 0 success, 2 usage error, 3 data error, 4 convergence failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a sample and write it as CSV (header x1..xp).
    Simulate(SimulateArgs),
    /// Estimate alpha from a CSV sample.
    Fit(FitArgs),
    /// Print closed-form summaries for a given alpha.
    Describe(DescribeArgs),
    /// Tabulate the density on an angular grid (p = 2 or 3).
    DensityGrid(DensityGridArgs),
    /// Run the four-scenario simulation study with both estimators.
    #[command(name = "reproduce-table1")]
    ReproduceTable1(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Concentration parameters, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub alpha: Vec<f64>,
    /// Number of rows.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mom,
    Mle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    None,
    LogShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomCoordinateArg {
    /// The first column.
    First,
    /// The column with the largest sample mean.
    LargestMean,
}

#[derive(Debug, Clone, Args)]
pub struct Tolerances {
    /// Lower bound on every alpha during maximum likelihood.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Step tolerance (MLE) and relative alpha0 tolerance (MOM).
    #[arg(long, default_value_t = 1e-8)]
    pub delta: f64,
    /// Projected-gradient tolerance for maximum likelihood.
    #[arg(long, default_value_t = 1e-8)]
    pub gtol: f64,
    /// Iteration cap for maximum likelihood.
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Cap on alpha0 update cycles for the method of moments.
    #[arg(long, default_value_t = 100_000)]
    pub mom_max_iter: usize,
    /// L-BFGS memory (0 gives scaled steepest descent).
    #[arg(long, default_value_t = 10)]
    pub memory: usize,
    /// Coordinate used for the first-moment equation.
    #[arg(long, value_enum, default_value_t = MomCoordinateArg::First)]
    pub mom_coordinate: MomCoordinateArg,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV: one observation per row, optional header, `#` comments.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// `log-shift` maps raw counts through ln(c + x) and scales rows to unit length.
    #[arg(long, value_enum, default_value_t = TransformArg::None)]
    pub transform: TransformArg,
    /// The constant c of the log-shift transform.
    #[arg(long, default_value_t = DEFAULT_SHIFT)]
    pub shift: f64,
    /// Scale rows to unit length (transform none only).
    #[arg(long)]
    pub renormalize: bool,
    /// Known alpha; adds the percentage norm error of each estimate.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub truth: Option<Vec<f64>>,
    /// Also write the results as a flat JSON object.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Args)]
pub struct DescribeArgs {
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub alpha: Vec<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityGridArgs {
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub alpha: Vec<f64>,
    /// Points per angle; p = 3 gives resolution² rows.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub resolution: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Scenario k samples from stream `seed + k`.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Sample size per scenario.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Largest acceptable percentage error.
    #[arg(long, default_value_t = 5.0)]
    pub max_error: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub tolerances: Tolerances,
}
