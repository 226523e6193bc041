//! CSV ingestion.
//!
//! Two layouts are accepted, both with 1-based integer categories:
//! `x,y,z` with one row per observation, and `x,y,z,count` where each row
//! stands for `count` identical observations.

use std::path::Path;

use ucit_core::{Dataset, Observation};

use crate::CliError;

pub fn read_dataset(path: &Path, l1: Option<u32>, l2: Option<u32>, d: Option<u32>) -> Result<Dataset, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_dataset(file, l1, l2, d).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_dataset<R: std::io::Read>(
    reader: R,
    l1: Option<u32>,
    l2: Option<u32>,
    d: Option<u32>,
) -> Result<Dataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect();
    let aggregated = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["x", "y", "z"] => false,
        ["x", "y", "z", "count"] => true,
        _ => {
            return Err(CliError::Input(format!(
                "expected header 'x,y,z' or 'x,y,z,count', found '{}'",
                headers.join(",")
            )))
        }
    };
    let limits = [("x", l1), ("y", l2), ("z", d)];
    let mut observations = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut values = [0u32; 3];
        for (i, (name, limit)) in limits.iter().enumerate() {
            let v: u32 = record[i].parse().map_err(|_| {
                CliError::Input(format!(
                    "line {line}: {name} = '{}' is not a positive integer",
                    &record[i]
                ))
            })?;
            if v == 0 || limit.is_some_and(|m| v > m) {
                let bound = limit.map_or("the data".to_string(), |m| m.to_string());
                return Err(CliError::Input(format!(
                    "line {line}: {name} = {v} is outside [1, {bound}]"
                )));
            }
            values[i] = v;
        }
        let count: u64 = if aggregated {
            record[3].parse().map_err(|_| {
                CliError::Input(format!(
                    "line {line}: count = '{}' is not a nonnegative integer",
                    &record[3]
                ))
            })?
        } else {
            1
        };
        let obs = Observation::new(values[0], values[1], values[2]);
        observations.extend(std::iter::repeat_n(obs, count as usize));
    }
    Ok(Dataset::with_partial_domain(observations, l1, l2, d)?)
}
