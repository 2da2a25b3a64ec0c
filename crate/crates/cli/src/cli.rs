use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "mcb", version, about = "Quantitative convergence bounds for Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory for report files. Reports go to stdout when omitted.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase", tag = "subcommand")]
pub enum Command {
    /// Exact analysis of a finite chain.
    Finite(FiniteArgs),
    /// Convergence bounds from minorization (t1) or drift and minorization (t2) constants.
    Bound(BoundArgs),
    /// Monte Carlo simulation of the coupling construction.
    Simulate(SimulateArgs),
    /// Numerical check of a drift or minorization condition for a built-in kernel.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("chain").required(true).args(["grid", "matrix"])))]
pub struct ChainSource {
    /// Lazy grid walk with R rows and C columns, written RxC.
    #[arg(long, value_name = "RxC")]
    pub grid: Option<String>,

    /// JSON matrix file: {"size": n, "rows": [["p/q", ...], ...]}.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,

    /// Initial state, numbered from 1. Defaults to the centre cell of a grid or state 1.
    #[arg(long)]
    pub start: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiniteAnalysis {
    Stationary,
    EigenBound,
    Minorization,
    Pseudo,
    TvExact,
}

#[derive(Debug, Args, Serialize)]
pub struct FiniteArgs {
    #[arg(value_enum)]
    pub analysis: FiniteAnalysis,

    #[command(flatten)]
    pub chain: ChainSource,

    /// Step count of the minorization condition.
    #[arg(long, default_value_t = 2)]
    pub n0: u64,

    /// Length of reported curves.
    #[arg(long, default_value_t = 100)]
    pub n: u64,

    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,

    /// State whose probability the eigenvalue bound tracks. Defaults to the start state.
    #[arg(long)]
    pub target: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// `(1 - eps)^floor(n / n0)`.
    T1,
    /// `(1 - eps)^j + alpha^-n B^(j-1) E h`, minimized over `j`.
    T2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundPreset {
    GridUniform,
    GridPseudo,
    Halfline,
    PointProcess,
    RwmLaplace,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[arg(value_enum)]
    pub kind: BoundKind,

    #[arg(long, value_enum)]
    pub preset: Option<BoundPreset>,

    /// Minorization constant, as a decimal or p/q.
    #[arg(long)]
    pub epsilon: Option<String>,

    #[arg(long)]
    pub n0: Option<u64>,

    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,

    /// Length of the reported minorization-bound curve.
    #[arg(long)]
    pub n: Option<u64>,

    #[arg(long)]
    pub lambda: Option<f64>,

    #[arg(long)]
    pub b: Option<f64>,

    /// Infimum of V outside the small set.
    #[arg(long)]
    pub d: Option<f64>,

    /// Bound on sup over C x C of the residual expectation of h.
    #[arg(long = "sup-rh", conflicts_with = "b_constant")]
    pub sup_rh: Option<f64>,

    /// The constant B directly.
    #[arg(long = "B", id = "b_constant")]
    pub b_constant: Option<f64>,

    /// Bound on E_{Z~pi} h(x0, Z).
    #[arg(long)]
    pub eh: Option<f64>,

    /// Also evaluate the drift bound at this n.
    #[arg(long)]
    pub at_n: Option<u64>,

    /// Coupling-attempt count for --at-n. Defaults to the best j.
    #[arg(long, requires = "at_n")]
    pub at_j: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("model").required(true).args(["grid", "matrix", "halfline", "rwm_laplace"])))]
pub struct SimulateArgs {
    #[arg(long, value_name = "RxC")]
    pub grid: Option<String>,

    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,

    /// Half-line mixture chain with its uniform minorization.
    #[arg(long)]
    pub halfline: bool,

    /// Laplace random-walk Metropolis chain with its small-set minorization.
    #[arg(long)]
    pub rwm_laplace: bool,

    /// Certificate for finite chains.
    #[arg(long, value_enum, default_value_t = CertChoice::Uniform)]
    pub cert: CertChoice,

    /// Step count of the finite-chain certificate.
    #[arg(long, default_value_t = 2)]
    pub n0: u64,

    /// Initial state of a finite chain, numbered from 1.
    #[arg(long)]
    pub start: Option<usize>,

    /// Initial state of a continuous chain.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,

    #[arg(long, default_value_t = 60)]
    pub n_max: u64,

    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,

    #[arg(long, env = "MCB_SEED", default_value_t = 42)]
    pub seed: u64,

    /// Worker threads; all available cores when omitted, 1 for a sequential run.
    #[arg(long)]
    pub workers: Option<usize>,

    /// Keep the lattice trajectories of this many replications (written as CSV).
    #[arg(long, default_value_t = 0)]
    pub trajectories: u64,

    /// Record statistics only up to this n; replications then run until they meet or reach --n-max.
    #[arg(long)]
    pub record_horizon: Option<u64>,

    /// Burn-in steps for the approximate stationary start of the half-line chain.
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertChoice {
    Uniform,
    Pseudo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Drift,
    Minorization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelPreset {
    Halfline,
    RwmLaplace,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub condition: Condition,

    #[arg(long, value_enum)]
    pub preset: KernelPreset,

    #[arg(long)]
    pub lambda: Option<f64>,

    #[arg(long)]
    pub b: Option<f64>,

    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Probe grid lower end; defaults to the preset's range.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_lo: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub grid_hi: Option<f64>,

    #[arg(long)]
    pub step: Option<f64>,

    /// Absolute tolerance of the adaptive quadrature.
    #[arg(long, default_value_t = 1e-8)]
    pub abs_tol: f64,

    #[arg(long)]
    pub workers: Option<usize>,
}
