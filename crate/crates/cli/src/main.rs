//! `metastable`: command-line front end to the metastability toolkit.
//!
//! Exit codes: 0 when the checked property holds, 1 when it fails or a
//! counterexample is found, 2 on usage or input errors.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "metastable", version, about = "Rates of metastability, approximate satisfaction and finite measure audits")]
pub struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Oscillation and metastability of one sequence; checks a rate when --E is given.
    Analyze(AnalyzeArgs),
    /// Uniform rates of metastability.
    #[command(subcommand)]
    Rate(RateCommand),
    /// Positive bounded formulas over finite structures.
    #[command(subcommand)]
    Logic(LogicCommand),
    /// Finite measure structures.
    #[command(subcommand)]
    Measure(MeasureCommand),
    /// Dominated convergence on finite measure structures.
    #[command(subcommand)]
    Dct(DctCommand),
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Sequence file (JSON, or CSV with one value per line).
    #[arg(long)]
    pub seq: PathBuf,
    #[arg(long)]
    pub eps: String,
    /// Sampling: n+c, kn+c, JSON, or a JSON file.
    #[arg(long = "F")]
    pub f: String,
    /// Candidate rate: a..b, a,b,c, JSON, or a file with a rate or an emitted report.
    #[arg(long = "E")]
    pub e: Option<String>,
    /// Witness search bound when no rate is given.
    #[arg(long, default_value_t = 1000)]
    pub horizon: usize,
    /// Periodic tail for CSV input (default: constant).
    #[arg(long)]
    pub period: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum RateCommand {
    /// E = {0..F^(⌈1/ε⌉)(0)}, valid for every nondecreasing sequence in [0, 1].
    Monotone {
        #[arg(long)]
        eps: String,
        #[arg(long = "F")]
        f: String,
    },
    /// Least prefix rate {0..m} working for every given sequence.
    Brute {
        #[arg(long, num_args = 1.., required = true)]
        seqs: Vec<PathBuf>,
        #[arg(long)]
        eps: String,
        #[arg(long = "F")]
        f: String,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
    },
    /// Checks one rate against every given sequence.
    Audit {
        #[arg(long, num_args = 1.., required = true)]
        seqs: Vec<PathBuf>,
        #[arg(long)]
        eps: String,
        #[arg(long = "F")]
        f: String,
        #[arg(long = "E")]
        e: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogicMode {
    Exact,
    Approx,
}

#[derive(Subcommand, Debug)]
pub enum LogicCommand {
    /// Decides M ⊨ φ (exact) or M ⊨≈ φ (approx).
    Check {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, value_enum, default_value_t = LogicMode::Approx)]
        mode: LogicMode,
        /// Free variable values, as name=point-label or name=rational.
        #[arg(long = "assign")]
        assign: Vec<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TvChoice {
    Fast,
    Audit,
}

#[derive(Subcommand, Debug)]
pub enum MeasureCommand {
    /// Exhaustive audit of the algebra, measure and integration clauses.
    Audit {
        #[arg(long)]
        structure: PathBuf,
        /// Test functions for the integration clauses (JSON or file).
        #[arg(long = "function")]
        functions: Vec<String>,
        /// Scalars for the linearity clause.
        #[arg(long = "scalar", default_values_t = ["2".to_owned(), "-1/2".to_owned()])]
        scalars: Vec<String>,
    },
    /// I f for a function given as JSON or a file.
    Integrate {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long = "f")]
        f: String,
    },
    /// Total variation ‖μ‖.
    Tv {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, value_enum, default_value_t = TvChoice::Fast)]
        mode: TvChoice,
    },
}

#[derive(Subcommand, Debug)]
pub enum DctCommand {
    /// osc(Iφ) ≤ ‖μ‖ · max_ω osc(φ(ω)) for one family.
    Check {
        #[arg(long)]
        family: PathBuf,
    },
    /// Uniform rate for the integral sequences of a finite class.
    Search(SearchArgs),
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Family files (a file may hold a JSON array of families).
    #[arg(long, num_args = 1.., required_unless_present = "monotone")]
    pub class: Vec<PathBuf>,
    /// Use the built-in monotone-slice class instead of files.
    #[arg(long, conflicts_with = "class")]
    pub monotone: bool,
    /// Grid levels of the monotone-slice class.
    #[arg(long, default_value_t = 4)]
    pub levels: i64,
    /// Slice length of the monotone-slice class.
    #[arg(long, default_value_t = 4)]
    pub len: usize,
    #[arg(long, default_value = "0")]
    pub r: String,
    #[arg(long, default_value = "1")]
    pub s: String,
    #[arg(long = "F", default_value = "n+1")]
    pub f: String,
    /// Slice rate E^r (JSON or file); defaults to the monotone rate at each grid ε.
    #[arg(long = "rate-r")]
    pub rate_r: Option<String>,
    #[arg(long = "eps-grid", value_delimiter = ',', default_value = "1,1/2,2/5,1/4,1/10")]
    pub eps_grid: Vec<String>,
    #[arg(long, default_value_t = 64)]
    pub horizon: usize,
    /// Held-out families drawn from the built-in class (seeded by METASTABLE_SEED).
    #[arg(long, default_value_t = 0, requires = "monotone")]
    pub validate: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            report.print(cli.json);
            ExitCode::from(if report.holds { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
