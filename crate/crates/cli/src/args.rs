use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "tripint",
    version,
    about = "Triple integrals with variable limits via Euler + Richardson extrapolation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Problem file (INI).
    #[arg(long, global = true, value_name = "FILE")]
    pub problem: Option<PathBuf>,

    /// Directory for CSV/SVG artifacts (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Cross-check against nested quadrature.
    #[arg(long, global = true)]
    pub oracle: bool,

    /// Base step count; takes precedence over any tolerance.
    #[arg(long, global = true, value_name = "N")]
    pub steps: Option<usize>,

    /// Extrapolation order.
    #[arg(long, global = true, value_name = "S")]
    pub order: Option<usize>,

    /// Tolerance for step-size control.
    #[arg(long, global = true, value_name = "D", allow_hyphen_values = true)]
    pub delta: Option<f64>,

    /// Comma-separated step sizes.
    #[arg(long = "h-list", global = true, value_name = "CSV")]
    pub h_list: Option<String>,

    /// Comma-separated tolerances.
    #[arg(long = "delta-list", global = true, value_name = "CSV")]
    pub delta_list: Option<String>,

    /// Repeat pilot and selection until the step settles within 5%.
    #[arg(long, global = true)]
    pub iterate: bool,

    /// Suppress informational messages on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Outer tolerance for the nested-quadrature oracle.
    #[arg(long = "oracle-tol", global = true, value_name = "TOL")]
    pub oracle_tol: Option<f64>,

    /// Known exact value for error columns, instead of the oracle.
    #[arg(long, global = true, value_name = "V", allow_hyphen_values = true)]
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve with a fixed step count (--steps) or a tolerance (delta).
    Solve,
    /// Evaluate the integral by nested adaptive quadrature.
    Oracle,
    /// Print exact extrapolation weights for --order.
    Coeffs,
    /// Convergence table (--h-list) or tolerance/step table (--delta-list).
    Table,
    /// Time Euler against order-4 extrapolation (--h-list).
    Bench,
    /// Euler and order-4 curves as CSV and SVG (--steps, --out).
    Plot,
}
