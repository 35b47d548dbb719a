use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ness", version, about = "Reservoir-driven steady states of free-fermion chains")]
pub struct Cli {
    /// Worker threads for parallel work (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Do not write `.meta.json` sidecars next to output files.
    #[arg(long, global = true)]
    pub no_meta: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model file checks.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Steady-state correlations and occupation.
    #[command(subcommand)]
    Ness(NessCommand),
    /// Smallest relaxation rate.
    Gap(GapArgs),
    /// Criticality conditions, critical parameters and exponent prediction.
    #[command(subcommand)]
    Critical(CriticalCommand),
    /// Parameter sweep from a JSON sweep specification.
    Sweep(SweepArgs),
    /// Power-law fit of a sweep CSV.
    Fit(FitArgs),
    /// Figure data bundles.
    Figure(FigureArgs),
    /// Exact Liouvillian steady state of a tiny chain.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (standard output when absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Validate a model file and print its canonical form.
    Validate {
        model: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrelationMethod {
    Residue,
    Quadrature,
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GapMethod {
    Symbol,
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKindArg {
    Static,
    Dynamical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    Fig2,
    Fig4,
}

#[derive(Debug, Subcommand)]
pub enum NessCommand {
    /// `⟨w_{(0,α)} w_{(d,β)}⟩` for `d = 0..=dmax` as CSV `d,re,im`.
    Correlations {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "quadrature")]
        method: CorrelationMethod,
        #[arg(long, default_value_t = 20)]
        dmax: usize,
        /// Species pair `α,β` (0 = odd, 1 = even).
        #[arg(long, default_value = "0,0")]
        entry: String,
        /// Reference site for the finite method.
        #[arg(long, default_value_t = 0)]
        site: usize,
        /// Quadrature accuracy target.
        #[arg(long, env = "NESS_TOL_QUADRATURE", default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Mean occupation `⟨c^† c⟩` per site.
    Occupation {
        model: PathBuf,
        #[arg(long, env = "NESS_TOL_QUADRATURE", default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct GapArgs {
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "symbol")]
    pub method: GapMethod,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum CriticalCommand {
    /// Criticality conditions and moment order at `z0`.
    Check {
        model: PathBuf,
        /// Point on the unit circle, `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
        #[arg(long, default_value_t = 0)]
        generator: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Critical parameter family for span `N`, order `M` at `z0`.
    Solve {
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        order: usize,
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
        /// Pinned coefficient `j:re,im`; repeatable.
        #[arg(long = "fix", allow_hyphen_values = true)]
        fixed: Vec<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exponent prediction from the exact rational structure.
    Predict {
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        generator: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub spec: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sweep CSV as written by `ness sweep`.
    pub sweep: PathBuf,
    #[arg(long, value_enum)]
    pub kind: FitKindArg,
    /// Critical parameter value.
    #[arg(long, allow_hyphen_values = true)]
    pub pc: f64,
    /// `λ` for dynamical fits.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Fit window `lo,hi` in `|p - p_c|`.
    #[arg(long, env = "NESS_TOL_FIT_WINDOW", default_value = "1e-4,1e-2")]
    pub window: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, value_enum)]
    pub id: FigureArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub model: PathBuf,
    /// Chain length (at most 4); overrides the model's chain.
    #[arg(long = "L")]
    pub sites: Option<usize>,
    /// Open boundary conditions when `--L` is given.
    #[arg(long)]
    pub open: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}
