use ucit_core::{PowerEstimate, TestResult};

use crate::args::Format;
use crate::CliError;

pub const POWER_HEADER: &str = "scenario,method,n,B,alpha,reps,power,se,seed";
pub const TEST_HEADER: &str = "method,calibration,statistic,p_value,decision,B,alpha,seed,df,skipped_bins";

fn json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Config(format!("cannot serialize result: {e}")))
}

pub fn test_result(r: &TestResult, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let decision = serde_json::to_value(r.decision)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            let skipped: Vec<String> = r.skipped_bins.iter().map(u32::to_string).collect();
            Ok(format!(
                "{TEST_HEADER}\n{},{},{},{},{},{},{},{},{},{}\n",
                r.method,
                r.calibration,
                r.statistic,
                r.p_value,
                decision,
                r.b,
                r.alpha,
                r.seed,
                r.df.map_or(String::new(), |d| d.to_string()),
                skipped.join(";")
            ))
        }
    }
}

pub fn power_estimates(rows: &[PowerEstimate], format: Format) -> Result<String, CliError> {
    match (format, rows) {
        (Format::Json, [one]) => json(one),
        (Format::Json, _) => json(&rows),
        (Format::Csv, _) => {
            let mut out = String::from(POWER_HEADER);
            out.push('\n');
            for e in rows {
                out += &format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    e.scenario, e.method, e.n, e.b, e.alpha, e.reps, e.power, e.se, e.seed
                );
            }
            Ok(out)
        }
    }
}
