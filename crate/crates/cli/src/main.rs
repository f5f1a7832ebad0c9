mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use output::Format;

/// Bohr radii, majorant curves, truncated-model norms and inequality
/// verification on noncommutative polyballs.
///
/// Numbers are printed with 12 significant digits using a decimal point and
/// no grouping separators.
#[derive(Debug, Parser)]
#[command(name = "polybohr", version)]
pub struct Cli {
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Truncation degrees per factor, e.g. `6,4`. Defaults to the polynomial
    /// degree plus 4 in each factor.
    #[arg(long, global = true, value_delimiter = ',')]
    trunc: Option<Vec<usize>>,
    /// Numerical tolerance (solvers and inequality slack).
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Trials per verification suite.
    #[arg(long, global = true, default_value_t = 500)]
    trials: usize,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Radius tables.
    ///
    /// The `k` table has columns `k, simple, gamma_k, sqrt_lower, log_upper,
    /// mh0_simple, mh0_lower, t_k0`: 1−(2/3)^{1/k}, the root γ_k,
    /// 1/(3√k), 2√(log k)/√k, √(1−(1/2)^{1/k}), 1/(2√k) and t_k⁰. Entries
    /// stated only for k > 1 are empty at k = 1. The `m` table has columns
    /// `m, t_m`.
    Radii {
        /// Range of k, `a:b` inclusive.
        #[arg(long, default_value = "1:10")]
        k: String,
        /// Range of m, `a:b` inclusive.
        #[arg(long, default_value = "2:20")]
        m: String,
    },
    /// A bound or majorant curve as `r,value` rows.
    ///
    /// D and M are the multi-homogeneous and homogeneous majorants of a
    /// polynomial file; C, K and Omega are the closed-form bound functions
    /// with every radius equal to r.
    Curve {
        #[arg(long, value_enum)]
        kind: CurveKind,
        /// Polynomial file (required for D and M).
        #[arg(long)]
        file: Option<PathBuf>,
        /// Number of factors for C, K and Omega.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Radius grid `start:stop:count`.
        #[arg(long, default_value = "0:0.99:100")]
        grid: String,
    },
    /// Truncated operator norm ‖F(rS)‖.
    Norm {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Also report every truncation from the polynomial degree up to the
        /// chosen one.
        #[arg(long)]
        sweep: bool,
    },
    /// Truncated numerical radius ω(F(rS)).
    Numrad {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        sweep: bool,
    },
    /// Scalar evaluation F(z) at a point of the polyball.
    ///
    /// The point lists factors separated by `;` and coordinates by `,`,
    /// e.g. `0.1+0.2i,0.3;-0.4i`. Output rows are `row,col,re,im`.
    Eval {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Runs verification suites; exits nonzero iff a suite fails.
    ///
    /// A table of results goes to standard output; `--out` receives the
    /// JSON reports.
    Verify {
        /// Suites to run (default: all).
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        /// Extra levels above the polynomial degree.
        #[arg(long, default_value_t = 4)]
        headroom: usize,
        /// Largest degree in the Fejér suite.
        #[arg(long, default_value_t = 8)]
        m_max: usize,
        /// Multiplies the constant 2 of the Landau operator bound. Values
        /// below one corrupt the inequality on purpose (negative control).
        #[arg(long, default_value_t = 1.0)]
        perturb_constant: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    #[value(name = "D")]
    D,
    #[value(name = "M")]
    M,
    #[value(name = "C")]
    C,
    #[value(name = "K")]
    K,
    #[value(name = "Omega")]
    Omega,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
