//! `mixbound`: EM fitting, nonnegative rank 3 certification and boundary
//! classification from the command line.
//!
//! Exit codes: 0 success (member or interior), 1 verdict out or boundary,
//! 2 usage or input error, 3 numeric failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixbound::Error;

#[derive(Parser)]
#[command(name = "mixbound", version, about = "Mixture model boundaries and nonnegative rank 3")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a rank r mixture to a count table with seeded EM restarts.
    Em(EmArgs),
    /// Decide whether a nonnegative matrix has nonnegative rank at most 3.
    Nnrank3(MatrixArgs),
    /// Compute an exact nonnegative rank 3 factorization.
    Factorize(FactorizeArgs),
    /// Classify a matrix as interior, boundary or outside the model.
    Boundary(MatrixArgs),
    /// Count or list the zero patterns of the algebraic boundary.
    Patterns(PatternArgs),
    /// Parametric matrix families.
    Family {
        #[command(subcommand)]
        family: FamilyCommand,
    },
    /// Monte-Carlo experiments.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BackendArg {
    /// Rational arithmetic; decimal entries are read exactly.
    Exact,
    /// Double precision with a sign tolerance band.
    Float,
    /// Float input rounded to denominator 10^12, then exact.
    Promote,
}

#[derive(Args)]
pub struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct MatrixArgs {
    /// Matrix file: one row per line, comma-separated.
    #[arg(long, short)]
    input: PathBuf,
    /// Arithmetic backend. Defaults to exact for rational files and float
    /// for files with decimal entries.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct FactorizeArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Also write the left factor in the matrix format.
    #[arg(long)]
    a_out: Option<PathBuf>,
    /// Also write the right factor in the matrix format.
    #[arg(long)]
    b_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EmArgs {
    /// Count table file with nonnegative integer entries.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    r: usize,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = mixbound::em::DEFAULT_MAX_ITER)]
    iterations: usize,
    #[arg(long, default_value_t = mixbound::em::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = mixbound::em::DEFAULT_CRIT_TOL)]
    crit_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run restarts on one thread.
    #[arg(long)]
    sequential: bool,
    /// Write the best estimate in the matrix format.
    #[arg(long)]
    estimate_out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum KindArg {
    A,
    B,
    All,
}

#[derive(Args)]
pub struct PatternArgs {
    #[arg(long, short)]
    m: usize,
    #[arg(long, short)]
    n: usize,
    #[arg(long, value_enum, default_value = "all")]
    kind: KindArg,
    /// Report counts only.
    #[arg(long)]
    count_only: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
pub enum FamilyCommand {
    /// The 4x4 count table with entries a and b.
    Uab {
        #[arg(long, short)]
        a: u64,
        #[arg(long, short)]
        b: u64,
        /// Include the eight closed-form maximum likelihood estimates.
        #[arg(long)]
        mle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Matrices with a rectangle of columns inside a square; a, b in [0, 1].
    Rectangle {
        #[arg(long, short)]
        a: String,
        #[arg(long, short)]
        b: String,
        #[command(flatten)]
        common: Common,
    },
    /// The two-parameter family whose rank 3 locus is a quartic curve.
    Green {
        #[arg(long, short, allow_hyphen_values = true)]
        x: String,
        #[arg(long, short, allow_hyphen_values = true)]
        y: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ExperimentKind {
    /// Fit random tables and count non-critical estimates.
    Table1,
    /// Fit counts sampled from a planted rank r model.
    Planted,
    /// Sample the algebraic boundary and count topological boundary points.
    BoundaryFraction,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DistArg {
    /// Numerator and denominator independent on 1..=max.
    Height,
    /// Fractions p/q with 1 <= p <= q <= max.
    Unit,
    /// Integers on 1..=4.
    Integers,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DataArg {
    /// Independent uniform entries.
    Uniform,
    /// A uniform point of the simplex.
    Simplex,
}

#[derive(Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    kind: ExperimentKind,
    /// JSON configuration; flags given explicitly override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rows of each table [default: 4].
    #[arg(long, short)]
    m: Option<usize>,
    /// Columns of each table [default: 4].
    #[arg(long, short)]
    n: Option<usize>,
    /// Mixture size [default: 3].
    #[arg(long, short)]
    r: Option<usize>,
    /// Trials [default: 200].
    #[arg(long)]
    num_matrices: Option<usize>,
    /// EM restarts per trial [default: 100].
    #[arg(long)]
    restarts: Option<usize>,
    /// EM iterations per restart [default: 500].
    #[arg(long)]
    iterations: Option<usize>,
    /// Convergence threshold on the largest entry change [default: 1e-10].
    #[arg(long)]
    tol: Option<f64>,
    /// Relative tolerance of the criticality test [default: 1e-6].
    #[arg(long)]
    crit_tol: Option<f64>,
    /// Extra iterations from the best restart, 0 to disable [default: 20000].
    #[arg(long)]
    polish: Option<usize>,
    /// Master seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per cell in planted mode.
    #[arg(long, short)]
    t: Option<u32>,
    #[arg(long, value_enum)]
    dist: Option<DistArg>,
    /// Height bound for rational entry distributions.
    #[arg(long, default_value_t = 100)]
    max: u32,
    /// Entry distribution of random tables.
    #[arg(long, value_enum)]
    data: Option<DataArg>,
    /// 2000 restarts of up to 2000 iterations each.
    #[arg(long)]
    full_scale: bool,
    /// Classify flagged estimates geometrically.
    #[arg(long)]
    classify: bool,
    #[arg(long)]
    sequential: bool,
    /// Write one CSV row per trial here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

/// Outcome of a successful command: the payload was written and the
/// verdict selects the exit code.
pub enum Verdict {
    Ok,
    Negative,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) | Error::AmbiguousRoot { .. } => 3,
        Error::Refused(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Em(args) => commands::em(args),
        Command::Nnrank3(args) => commands::nnrank3(args),
        Command::Factorize(args) => commands::factorize(args),
        Command::Boundary(args) => commands::boundary(args),
        Command::Patterns(args) => commands::patterns(args),
        Command::Family { family } => commands::family(family),
        Command::Experiment(args) => commands::experiment(args),
    };
    match result {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mixbound: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
