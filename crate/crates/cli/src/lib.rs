//! Command-line front end for `ucit-core`.
//!
//! Exit codes: `0` on any completed run (whatever the decision), `2` for
//! unreadable or malformed input data, `3` for invalid option combinations.

pub mod args;
pub mod input;
pub mod output;

use std::time::Instant;

use thiserror::Error;
use ucit_core::{
    estimate_power, null_pmf, run_test, scenario_pmf, worst_case_pmf, Calibration, JointPmf, Method, TestPlan,
};

use crate::args::{Cli, Command, Format, PowerCurveArgs, ScenarioArgs, SimulateArgs, TestArgs};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Config(_) => EXIT_CONFIG,
        }
    }
}

impl From<ucit_core::Error> for CliError {
    fn from(e: ucit_core::Error) -> Self {
        match e {
            ucit_core::Error::CategoryOutOfRange { .. } | ucit_core::Error::InvalidInput(_) => {
                CliError::Input(e.to_string())
            }
            ucit_core::Error::Config(_) | ucit_core::Error::Domain(_) => CliError::Config(e.to_string()),
        }
    }
}

/// Runs a parsed command and returns what should be written to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let work = || match &cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::PowerCurve(a) => cmd_power_curve(a),
    };
    match cli.workers {
        Some(0) => Err(CliError::Config("--workers must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {k} workers: {e}")))?
            .install(work),
        None => work(),
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn plan(method: Method, calibration: Calibration, b: usize, alpha: f64, seed: u64) -> Result<TestPlan, CliError> {
    let plan = match calibration {
        Calibration::Permutation => TestPlan::permutation(method, b, alpha, seed),
        Calibration::Asymptotic => TestPlan {
            seed,
            ..TestPlan::asymptotic(method, alpha)
        },
    };
    plan.validate()?;
    Ok(plan)
}

pub fn cmd_test(a: &TestArgs) -> Result<String, CliError> {
    let plan = plan(a.method, a.calibration, a.b, a.alpha, resolve_seed(a.seed))?;
    let data = input::read_dataset(&a.input, a.l1, a.l2, a.d)?;
    let mut result = run_test(&data, &plan)?;
    if !a.replicates {
        result.replicates.clear();
    }
    output::test_result(&result, a.format)
}

fn build_pmf(s: &ScenarioArgs, n: usize) -> Result<JointPmf, CliError> {
    let pmf = match s.scenario.as_str() {
        "worst-case" | "worst_case" => worst_case_pmf(n, s.d)?,
        "null" => null_pmf(s.l1, s.l2, s.d)?,
        id => {
            let id: u32 = id
                .parse()
                .map_err(|_| CliError::Config(format!("unknown scenario '{id}'; expected 1-8, worst-case or null")))?;
            scenario_pmf(id, s.l1, s.l2, s.d)?
        }
    };
    Ok(pmf)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<String, CliError> {
    let seed = resolve_seed(a.seed);
    let plan = plan(a.method, a.calibration, a.b, a.alpha, seed)?;
    let pmf = build_pmf(&a.scenario, a.n)?;
    let started = Instant::now();
    let estimate = estimate_power(&pmf, a.n, &plan, a.reps, seed)?;
    log::info!("simulation finished in {:.3} s", started.elapsed().as_secs_f64());
    output::power_estimates(&[estimate], a.format)
}

pub fn cmd_power_curve(a: &PowerCurveArgs) -> Result<String, CliError> {
    if a.n.is_empty() || a.methods.is_empty() {
        return Err(CliError::Config(
            "power-curve needs at least one n and one method".into(),
        ));
    }
    let seed = resolve_seed(a.seed);
    let plans = a
        .methods
        .iter()
        .map(|&m| plan(m, a.calibration, a.b, a.alpha, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let started = Instant::now();
    let mut rows = Vec::new();
    for p in &plans {
        for &n in &a.n {
            let pmf = build_pmf(&a.scenario, n)?;
            rows.push(estimate_power(&pmf, n, p, a.reps, seed)?);
        }
    }
    log::info!("power curve finished in {:.3} s", started.elapsed().as_secs_f64());
    output::power_estimates(&rows, Format::Csv)
}
