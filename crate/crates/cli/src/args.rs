use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ucit_core::{Calibration, Method, DEFAULT_B};

#[derive(Debug, Parser)]
#[command(name = "ucit", version, about = "Conditional independence tests for discrete data")]
pub struct Cli {
    /// Worker threads for replicate and trial evaluation (defaults to all cores).
    #[arg(long, global = true, env = "UCIT_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test X ⟂ Y | Z on a CSV dataset.
    Test(TestArgs),
    /// Estimate the rejection rate of one test on a simulated scenario.
    Simulate(SimulateArgs),
    /// Estimate power over several sample sizes and methods, as CSV.
    PowerCurve(PowerCurveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: ucit_core::Error| e.to_string())
}

fn parse_calibration(s: &str) -> Result<Calibration, String> {
    s.parse().map_err(|e: ucit_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV with header `x,y,z` (one row per observation) or `x,y,z,count`.
    #[arg(long)]
    pub input: PathBuf,
    /// uci, wuci, wuci_split, chi2 or g.
    #[arg(long, default_value = "uci", value_parser = parse_method)]
    pub method: Method,
    /// permutation or asymptotic (the latter for chi2 and g only).
    #[arg(long, default_value = "permutation", value_parser = parse_calibration)]
    pub calibration: Calibration,
    /// Number of permutation replicates.
    #[arg(long = "B", visible_alias = "permutations", default_value_t = DEFAULT_B)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Master seed; drawn from OS entropy when omitted and echoed in the output.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Declared number of X categories; inferred from the data when omitted.
    #[arg(long)]
    pub l1: Option<u32>,
    #[arg(long)]
    pub l2: Option<u32>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include the replicate statistics in JSON output.
    #[arg(long)]
    pub replicates: bool,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario 1-8, `worst-case`, or `null`.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 20)]
    pub l1: u32,
    #[arg(long, default_value_t = 20)]
    pub l2: u32,
    #[arg(long, default_value_t = 10)]
    pub d: u32,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Sample size per trial.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "uci", value_parser = parse_method)]
    pub method: Method,
    #[arg(long, default_value = "permutation", value_parser = parse_calibration)]
    pub calibration: Calibration,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long = "B", visible_alias = "permutations", default_value_t = DEFAULT_B)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PowerCurveArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "uci,wuci,chi2,g", value_parser = parse_method)]
    pub methods: Vec<Method>,
    #[arg(long, default_value = "permutation", value_parser = parse_calibration)]
    pub calibration: Calibration,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long = "B", visible_alias = "permutations", default_value_t = DEFAULT_B)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}
