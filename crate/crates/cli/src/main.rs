//! `krieger` — build explicit nonsingular Poisson-suspension systems,
//! verify their orbit-equivalence type with certified series criteria, and
//! cross-check them by exact-distribution Monte Carlo.
//!
//! Exit codes: 0 = the system verified as declared, 2 = the run could not
//! determine the answer at the requested horizon, 1 = error.

mod artifacts;
mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "krieger",
    about = "Constructs, verifies, and simulates nonsingular Poisson-suspension systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a system specification and write it as canonical JSON.
    Construct(ConstructArgs),
    /// Run the certified series criteria and classify the system.
    Verify(VerifyArgs),
    /// Monte Carlo checks: RN expectation, skew statistic, ratio set.
    Simulate(SimulateArgs),
    /// Render SVG histograms and a markdown summary from a finished run.
    Report(ReportArgs),
}

#[derive(clap::Args)]
pub struct ConstructArgs {
    /// One of: ii-inf, iii-0, iii-lambda, iii-1.
    #[arg(long)]
    pub kind: String,
    /// Density parameter for iii-lambda (in (0,1) ∪ (1,∞), not 1).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// First density parameter for iii-1.
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Second density parameter for iii-1 (log ratio must be irrational).
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Default truncation depth stored in the spec.
    #[arg(long, default_value_t = 64)]
    pub blocks: u64,
    /// Explicit iii-0 level exponents (comma separated, divisibility chain);
    /// defaults to the unbounded segmented schedule.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
    /// Output path for the spec JSON.
    #[arg(long, default_value = "spec.json")]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct VerifyArgs {
    /// Path to a spec JSON produced by `construct`.
    #[arg(long)]
    pub spec: PathBuf,
    /// Optional JSON config file; explicit flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Series horizon (number of certified terms).
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Group element enumeration indices to test.
    #[arg(long, value_delimiter = ',')]
    pub elements: Option<Vec<u64>>,
    /// Output directory for report.json / metadata.json.
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct SimulateArgs {
    /// Path to a spec JSON produced by `construct`.
    #[arg(long)]
    pub spec: PathBuf,
    /// Optional JSON config file; explicit flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Number of modeled blocks (truncation depth).
    #[arg(long)]
    pub blocks: Option<u64>,
    /// Shell radius around each tower (must cover element displacements).
    #[arg(long)]
    pub shell: Option<i64>,
    /// Base RNG seed; runs are pure functions of (config, seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Group element enumeration indices to test.
    #[arg(long, value_delimiter = ',')]
    pub elements: Option<Vec<u64>>,
    /// Blocks conditioned to zero tower counts (ratio-set runs).
    #[arg(long, value_delimiter = ',')]
    pub condition: Option<Vec<u64>>,
    /// Output directory for report.json, CSV dumps, metadata.json.
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct ReportArgs {
    /// Directory of a finished `verify` or `simulate` run.
    #[arg(long)]
    pub run: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Construct(a) => commands::cmd_construct(a),
        Command::Verify(a) => commands::cmd_verify(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Report(a) => commands::cmd_report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
