//! `expfact`: command-line driver for the Wilcox, Fer and Zassenhaus
//! factorizations, the convergence bound and the worked-example sweeps.

mod commands;
mod error;
mod opspec;
mod output;

use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Context;

#[derive(Parser)]
#[command(name = "expfact", version, about = "Exponential product factorizations of linear ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Wilcox weights on permutation words and in the commutator basis
    WilcoxWeights(WeightsArgs),
    /// Symbolic Zassenhaus exponent C_N(X, Y) as a noncommutative polynomial
    Zassenhaus(ZassenhausArgs),
    /// Truncated series of the first Wilcox-Bellman exponent
    BellmanC1(BellmanArgs),
    /// Wilcox generators W_1..W_N of an operator on a grid
    WilcoxNumeric(SeriesArgs),
    /// Fer exponents Omega_1..Omega_N of an operator on a grid
    FerNumeric(FerArgs),
    /// Three exponents of the modified Fer expansion on a grid
    ModifiedFer(ModifiedFerArgs),
    /// Convergence coefficients D_n and the extrapolated radius
    ConvergenceBound(BoundArgs),
    /// SU(2) |U_12|^2 errors of the Wilcox-Bellman approximants versus epsilon
    Su2Sweep(Su2Args),
    /// SO(3) trace errors of the Wilcox-Bellman approximants versus theta
    So3Sweep(So3Args),
    /// Dyson terms against their reconstruction from Wilcox generators
    DysonCheck(DysonArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Rightmost label of the commutator basis (default n)
    #[arg(long)]
    fixed_last: Option<u8>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ZassenhausArgs {
    #[arg(long)]
    n: usize,
    /// Emit W_N(t) with its powers of t instead of C_N = W_N(1)
    #[arg(long)]
    time_dependent: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BellmanArgs {
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct GridArgs {
    /// `su2(a)`, `so3(alpha,theta)` or a .json/.toml operator file
    #[arg(long)]
    op: String,
    #[arg(long, default_value_t = 10_001)]
    nodes: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    t1: f64,
    /// Emit every stride-th node (the last node is always emitted)
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct FerArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Relative cutoff of the ad-series
    #[arg(long, default_value_t = expfact_core::fer::DEFAULT_TOL)]
    tol: f64,
    /// Maximum ad-series power
    #[arg(long, default_value_t = expfact_core::fer::DEFAULT_KMAX)]
    kmax: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ModifiedFerArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Fraction of the sequence used by the 1/n extrapolation
    #[arg(long, default_value_t = 0.5)]
    tail: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct Su2Args {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 5)]
    max_order: usize,
    #[arg(long, default_value_t = expfact_core::experiments::DEFAULT_SWEEP_NODES)]
    nodes: usize,
    #[arg(long, default_value_t = 0.01)]
    eps_min: f64,
    #[arg(long, default_value_t = 1.2)]
    eps_max: f64,
    /// Number of log-spaced epsilon values
    #[arg(long, default_value_t = 60)]
    points: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct So3Args {
    #[arg(long, default_value_t = std::f64::consts::PI, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    max_order: usize,
    #[arg(long, default_value_t = expfact_core::experiments::DEFAULT_SWEEP_NODES)]
    nodes: usize,
    /// Number of evenly spaced theta values in [0, pi/2]
    #[arg(long, default_value_t = 181)]
    points: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct DysonArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Number of evenly spaced sample nodes
    #[arg(long, default_value_t = 11)]
    samples: usize,
    #[command(flatten)]
    out: OutputArgs,
}

fn main() {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let ctx = Context::from_env();
    if let Err(e) = commands::run(cli.command, &ctx) {
        eprintln!("expfact: {e}");
        process::exit(e.code as i32);
    }
}
