//! `scce`: estimation, simulation and specification tests for panels with
//! (possibly nonlinear) common factors.
//!
//! Exit status: 0 on success, 2 for bad input or configuration, 3 when a numerical
//! procedure fails (singular designs and the like).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scce_core::{BasisKind, Dgp, Error, KnotRate, Method};

#[derive(Debug, Parser)]
#[command(name = "scce", version, about = "Sieve common correlated effects panel estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate slope coefficients on a long-format CSV panel.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo study and report absolute bias and RMSE.
    Simulate(SimulateArgs),
    /// Test whether the factor proxies enter linearly.
    TestLinearity(LinearityArgs),
    /// Write one simulated panel as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Scce,
    Ccep,
    Ccemg,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Scce => Method::Scce,
            MethodArg::Ccep => Method::Ccep,
            MethodArg::Ccemg => Method::Ccemg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateArg {
    Quarter,
    Third,
    Fifth,
    Tenth,
}

impl From<RateArg> for KnotRate {
    fn from(r: RateArg) -> Self {
        match r {
            RateArg::Quarter => KnotRate::Quarter,
            RateArg::Third => KnotRate::Third,
            RateArg::Fifth => KnotRate::Fifth,
            RateArg::Tenth => KnotRate::Tenth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    CubicSpline,
    Hermite,
    PowerSeries,
}

impl From<BasisArg> for BasisKind {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::CubicSpline => BasisKind::CubicSpline,
            BasisArg::Hermite => BasisKind::Hermite,
            BasisArg::PowerSeries => BasisKind::PowerSeries,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DgpArg {
    E1,
    E2,
}

impl From<DgpArg> for Dgp {
    fn from(d: DgpArg) -> Self {
        match d {
            DgpArg::E1 => Dgp::E1,
            DgpArg::E2 => Dgp::E2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FactorArg {
    Stationary,
    RandomWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ErrorArg {
    Iid,
    Correlated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LoadingArg {
    Standard,
    ShiftedMeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Sieve options. Left unset they default to cubic splines with `J = ⌊T^{1/4}⌋`.
#[derive(Debug, Clone, Args)]
pub struct SieveArgs {
    /// Knot multiplier C in J = C * floor(T^(1/r)) [default: 1]
    #[arg(long)]
    pub knot_c: Option<usize>,
    /// Knot growth rate r [default: quarter]
    #[arg(long, value_enum)]
    pub knot_rate: Option<RateArg>,
    /// Basis family [default: cubic-spline]
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
}

impl SieveArgs {
    pub fn any_set(&self) -> bool {
        self.knot_c.is_some() || self.knot_rate.is_some() || self.basis.is_some()
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Long-format CSV with header unit,time,y,x1,...,xd
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Scce)]
    pub method: MethodArg,
    #[command(flatten)]
    pub sieve: SieveArgs,
    /// First-difference every series before estimation
    #[arg(long)]
    pub diff: bool,
    /// Bartlett window L for the HAC covariance [default: floor(T^(1/3))]
    #[arg(long)]
    pub hac_window: Option<usize>,
    /// Number of pair-bootstrap replications; omit to skip the bootstrap
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub dgp: DgpArg,
    /// Cross-section sizes; every N is paired with every T
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Time dimensions
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Scce)]
    pub method: MethodArg,
    #[command(flatten)]
    pub sieve: SieveArgs,
    #[arg(long, value_enum, default_value_t = FactorArg::Stationary)]
    pub factors: FactorArg,
    #[arg(long, value_enum, default_value_t = ErrorArg::Iid)]
    pub errors: ErrorArg,
    /// Serial and spatial dependence for correlated errors
    #[arg(long, default_value_t = 0.5)]
    pub pi: f64,
    /// Number of neighbours on each side for correlated errors
    #[arg(long, default_value_t = 5)]
    pub l_band: usize,
    /// Law of the E2 loadings
    #[arg(long, value_enum, default_value_t = LoadingArg::Standard)]
    pub loadings: LoadingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LinearityArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub sieve: SieveArgs,
    #[arg(long)]
    pub diff: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub dgp: DgpArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long, value_enum, default_value_t = FactorArg::Stationary)]
    pub factors: FactorArg,
    #[arg(long, value_enum, default_value_t = ErrorArg::Iid)]
    pub errors: ErrorArg,
    #[arg(long, default_value_t = 0.5)]
    pub pi: f64,
    #[arg(long, default_value_t = 5)]
    pub l_band: usize,
    #[arg(long, value_enum, default_value_t = LoadingArg::Standard)]
    pub loadings: LoadingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("SCCE_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidConfig(format!("SCCE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {threads} worker threads: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Estimate(args) => commands::estimate(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::TestLinearity(args) => commands::test_linearity(&args),
        Command::Generate(args) => commands::generate(&args),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
