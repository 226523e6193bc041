//! Monte Carlo permutation calibration.
//!
//! Replicates permute `y` within each conditional slice (or, for the split
//! statistic, within the evaluation part only, keeping the weight samples
//! fixed). The permutation for replicate `j` and bin `m` is drawn from its
//! own counter-based stream, so results do not depend on how replicates are
//! scheduled across threads.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{prepare, Scratch};
use crate::error::{Error, Result};
use crate::method::{Calibration, Method};
use crate::rng::{purpose, StreamFactory};
use crate::statistics::{aggregate, asymptotic_df, chi_square_sf};
use crate::tables::{partition_by_z, Dataset};
use crate::ustat::SplitBin;

/// Replicate count used when none is given.
pub const DEFAULT_B: usize = 199;

/// What to run: statistic, calibration, and Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestPlan {
    pub method: Method,
    pub calibration: Calibration,
    /// Number of permutation replicates; ignored for asymptotic calibration.
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl TestPlan {
    pub fn permutation(method: Method, b: usize, alpha: f64, seed: u64) -> Self {
        Self {
            method,
            calibration: Calibration::Permutation,
            b,
            alpha,
            seed,
        }
    }

    pub fn asymptotic(method: Method, alpha: f64) -> Self {
        Self {
            method,
            calibration: Calibration::Asymptotic,
            b: 0,
            alpha,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        match self.calibration {
            Calibration::Permutation if self.b < 1 => {
                Err(Error::Config("the number of permutations B must be at least 1".into()))
            }
            Calibration::Permutation if self.b > u32::MAX as usize => {
                Err(Error::Config(format!("B = {} exceeds the supported maximum", self.b)))
            }
            Calibration::Asymptotic if !self.method.is_classical() => Err(Error::Config(format!(
                "asymptotic calibration is only available for chi2 and g, not {}",
                self.method
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    Accept,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub calibration: Calibration,
    pub statistic: f64,
    pub p_value: f64,
    pub decision: Decision,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Reference degrees of freedom (asymptotic calibration only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<u64>,
    pub skipped_bins: Vec<u32>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub discarded: BTreeMap<u32, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replicates: Vec<f64>,
}

/// Rearranges the `y` values of a bin by a uniform random permutation.
pub fn local_permute<R: Rng + ?Sized>(bin: &[(u32, u32)], rng: &mut R) -> Vec<(u32, u32)> {
    let mut ys: Vec<u32> = bin.iter().map(|p| p.1).collect();
    ys.shuffle(rng);
    bin.iter().zip(ys).map(|(&(x, _), y)| (x, y)).collect()
}

/// Permutes `y` within the evaluation part only; the weight samples and
/// therefore the weights are left untouched.
pub fn half_permute<R: Rng + ?Sized>(sb: &SplitBin, rng: &mut R) -> SplitBin {
    SplitBin {
        d_xy: local_permute(&sb.d_xy, rng),
        ..sb.clone()
    }
}

/// `(1 + #{T_j ≥ T}) / (B + 1)`. Ties count against rejection.
pub fn permutation_pvalue(observed: f64, replicates: &[f64]) -> f64 {
    let exceed = replicates.iter().filter(|&&t| t >= observed).count();
    (exceed + 1) as f64 / (replicates.len() + 1) as f64
}

/// The `⌈p·N⌉`-th smallest of `N` values.
///
/// `p·N` is snapped to the nearest integer when within `1e-9` of it, so
/// that e.g. `0.95 · 200` selects the 190th value despite rounding.
pub fn empirical_quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "empirical_quantile needs at least one value");
    let n = values.len();
    let pos = p * n as f64;
    let k = if (pos - pos.round()).abs() <= 1e-9 {
        pos.round()
    } else {
        pos.ceil()
    };
    let k = (k as usize).clamp(1, n);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[k - 1]
}

/// Runs one conditional independence test.
///
/// With permutation calibration the output is a pure function of the data
/// (including its order) and the plan, independent of thread count.
pub fn run_test(data: &Dataset, plan: &TestPlan) -> Result<TestResult> {
    plan.validate()?;
    let binned = partition_by_z(data);
    match plan.calibration {
        Calibration::Asymptotic => {
            let stat = aggregate(&binned, plan.method);
            let dom = data.domain();
            let df = asymptotic_df(dom.l1, dom.l2, dom.d);
            let p_value = chi_square_sf(stat.value, df);
            Ok(TestResult {
                method: plan.method,
                calibration: plan.calibration,
                statistic: stat.value,
                p_value,
                decision: decide(p_value, plan.alpha),
                b: 0,
                alpha: plan.alpha,
                seed: plan.seed,
                df: Some(df),
                skipped_bins: stat.skipped_bins,
                discarded: stat.discarded,
                replicates: Vec::new(),
            })
        }
        Calibration::Permutation => {
            let prepared = prepare(&binned, plan.method);
            let factory = StreamFactory::new(plan.seed, purpose::PERMUTATION);
            let mut observed = 0.0;
            for bin in &prepared.bins {
                observed += bin.observed();
            }
            let replicates: Vec<f64> = (0..plan.b)
                .into_par_iter()
                .map_init(Scratch::default, |scratch, j| {
                    let mut total = 0.0;
                    for bin in &prepared.bins {
                        if bin.frozen() {
                            total += bin.observed();
                            continue;
                        }
                        let mut rng = factory.stream(j as u32, bin.z);
                        let mut ys = std::mem::take(&mut scratch.ys);
                        ys.clear();
                        ys.extend_from_slice(bin.ys());
                        ys.shuffle(&mut rng);
                        total += bin.evaluate(&ys, scratch);
                        scratch.ys = ys;
                    }
                    total
                })
                .collect();
            let p_value = permutation_pvalue(observed, &replicates);
            Ok(TestResult {
                method: plan.method,
                calibration: plan.calibration,
                statistic: observed,
                p_value,
                decision: decide(p_value, plan.alpha),
                b: plan.b,
                alpha: plan.alpha,
                seed: plan.seed,
                df: None,
                skipped_bins: prepared.skipped,
                discarded: prepared.discarded,
                replicates,
            })
        }
    }
}

fn decide(p_value: f64, alpha: f64) -> Decision {
    if p_value <= alpha {
        Decision::Reject
    } else {
        Decision::Accept
    }
}
