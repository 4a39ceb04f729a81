use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::OutputFormat;

#[derive(Debug, Parser)]
#[command(
    name = "ownconc",
    version,
    about = "Concentration, dependence and overlap diagnostics for investor x stock holdings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Input format; inferred from the file extension when absent.
    #[arg(long, global = true, value_enum)]
    pub input_format: Option<InputKind>,
    /// Compute the sparsity score Ψ (default: on up to 2000 labels).
    #[arg(long, global = true, overrides_with = "no_psi")]
    pub psi: bool,
    /// Skip the sparsity score Ψ.
    #[arg(long = "no-psi", global = true, overrides_with = "psi")]
    pub no_psi: bool,
    /// Restarts for the heuristic maximum of M on large matrices.
    #[arg(long, global = true, default_value_t = 64)]
    pub max_budget: usize,
    /// Seed for the restart permutations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Read a long/short book with a sign column.
    #[arg(long, global = true)]
    pub signed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// H_I, H_S, M, Ψ, X and ρ with per-label contributions.
    Dashboard { input: PathBuf },
    /// Investor- and stock-side decompositions of M and X.
    Decompose { input: PathBuf },
    /// Fixed-marginal range of M and the sparsity score Ψ.
    Psi { input: PathBuf },
    /// Fire-sale severity for a liquidation vector, or the worst case.
    Shock {
        input: PathBuf,
        /// File of `investor,value` lines; unlisted investors sell nothing.
        #[arg(long, required_unless_present = "worst")]
        delta: Option<PathBuf>,
        /// Use the centered shock that maximizes severity.
        #[arg(long, conflicts_with = "delta")]
        worst: bool,
    },
    /// Active returns and their variance for a vector of stock returns.
    Alpha {
        input: PathBuf,
        /// File of `stock,value` lines; unlisted stocks return zero.
        #[arg(long)]
        returns: PathBuf,
        /// Shift returns so that their cap-weighted mean is zero.
        #[arg(long)]
        project_returns: bool,
    },
    /// Merge two investors.
    Merge {
        input: PathBuf,
        first: String,
        second: String,
    },
    /// Remove a stock and renormalize.
    DropStock { input: PathBuf, stock: String },
    /// Add a passive market investor with share λ.
    Dilute {
        input: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// Between/within split of X for a grouping of investors.
    Aggregate {
        input: PathBuf,
        /// One group per line, comma-separated investor labels; unlisted
        /// investors form their own groups.
        #[arg(long)]
        partition: PathBuf,
    },
    /// Closed-form families with fixed marginals.
    Family {
        #[command(subcommand)]
        kind: FamilyKind,
    },
    /// Rényi-order concentration indices.
    Renyi {
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Net benchmark and dependence of a long/short book.
    Signed { input: PathBuf },
    /// Write the normalized matrix as a holdings CSV.
    Export { input: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum FamilyKind {
    /// The 2×2 polytope with p = (a, 1−a), s = (b, 1−b).
    #[command(name = "2x2")]
    TwoByTwo {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Evaluate M at this member as well.
        #[arg(long)]
        x: Option<f64>,
    },
    /// A(t) = [[t, ½−t], [½−t, t]] with uniform marginals.
    Nonid {
        #[arg(long)]
        t: f64,
    },
}
