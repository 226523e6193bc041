//! Joint distributions over `[ℓ₁] × [ℓ₂] × [d]`, sampling, and Monte Carlo
//! power estimation.

use rand::distributions::Distribution;
use rand::Rng;
use rand_distr::WeightedAliasIndex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::method::{Calibration, Method};
use crate::permutation::{run_test, Decision, TestPlan};
use crate::rng::{derive_seed, purpose, StreamFactory};
use crate::tables::{Dataset, Domain, Observation};

const SUM_TOLERANCE: f64 = 1e-12;

/// A probability mass function on `[ℓ₁] × [ℓ₂] × [d]`, stored as the
/// marginal of `Z` and dense conditional tables `p(x, y | z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    label: String,
    domain: Domain,
    p_z: Vec<f64>,
    /// Row-major `ℓ₁ × ℓ₂` tables, one per `z`.
    conditionals: Vec<f64>,
}

impl JointPmf {
    /// Builds `p(x, y, z) = p_Z(z) · p(x, y | z)` from a marginal of `Z` and a
    /// conditional table generator returning `ℓ₁ · ℓ₂` row-major entries.
    pub fn from_conditionals(
        label: impl Into<String>,
        domain: Domain,
        p_z: &[f64],
        mut conditional: impl FnMut(u32) -> Vec<f64>,
    ) -> Result<Self> {
        if p_z.len() != domain.d as usize {
            return Err(Error::InvalidInput(format!(
                "p_Z has {} entries, expected {}",
                p_z.len(),
                domain.d
            )));
        }
        let cells = (domain.l1 * domain.l2) as usize;
        let mut conditionals = Vec::with_capacity(cells * domain.d as usize);
        for z in 1..=domain.d {
            let cond = conditional(z);
            if cond.len() != cells {
                return Err(Error::InvalidInput(format!(
                    "conditional for z={z} has {} entries, expected {cells}",
                    cond.len()
                )));
            }
            conditionals.extend(cond);
        }
        let pmf = Self {
            label: label.into(),
            domain,
            p_z: p_z.to_vec(),
            conditionals,
        };
        pmf.validate()?;
        Ok(pmf)
    }

    /// Wraps a dense joint table indexed by `((z-1)·ℓ₁ + x-1)·ℓ₂ + y-1`.
    pub fn from_joint(label: impl Into<String>, domain: Domain, probs: Vec<f64>) -> Result<Self> {
        let cells = domain.l1 as usize * domain.l2 as usize;
        if probs.len() != cells * domain.d as usize {
            return Err(Error::InvalidInput(format!(
                "pmf has {} entries, expected {}",
                probs.len(),
                cells * domain.d as usize
            )));
        }
        let p_z: Vec<f64> = probs.chunks(cells).map(|c| c.iter().sum()).collect();
        let conditionals = probs
            .chunks(cells)
            .zip(&p_z)
            .flat_map(|(c, &pz)| c.iter().map(move |p| if pz > 0.0 { p / pz } else { 0.0 }))
            .collect();
        let pmf = Self {
            label: label.into(),
            domain,
            p_z,
            conditionals,
        };
        pmf.validate()?;
        Ok(pmf)
    }

    fn validate(&self) -> Result<()> {
        if let Some(p) = self
            .p_z
            .iter()
            .chain(&self.conditionals)
            .find(|p| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "probabilities must be finite and nonnegative, found {p}"
            )));
        }
        let total: f64 = self.probs().iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Dense joint probabilities in `(z, x, y)` row-major order.
    pub fn probs(&self) -> Vec<f64> {
        let cells = (self.domain.l1 * self.domain.l2) as usize;
        self.conditionals
            .chunks(cells)
            .zip(&self.p_z)
            .flat_map(|(c, &pz)| c.iter().map(move |p| pz * p))
            .collect()
    }

    fn index(&self, x: u32, y: u32, z: u32) -> usize {
        let Domain { l1, l2, .. } = self.domain;
        (((z - 1) * l1 + (x - 1)) * l2 + (y - 1)) as usize
    }

    fn coords(&self, i: usize) -> (u32, u32, u32) {
        let Domain { l1, l2, .. } = self.domain;
        let i = i as u32;
        (i / l2 % l1 + 1, i % l2 + 1, i / (l1 * l2) + 1)
    }

    pub fn prob(&self, x: u32, y: u32, z: u32) -> f64 {
        self.p_z[(z - 1) as usize] * self.conditionals[self.index(x, y, z)]
    }

    pub fn p_z(&self, z: u32) -> f64 {
        self.p_z[(z - 1) as usize]
    }

    /// `p(x, y | z)`.
    pub fn conditional(&self, x: u32, y: u32, z: u32) -> f64 {
        self.conditionals[self.index(x, y, z)]
    }
}

fn uniform(d: u32) -> Vec<f64> {
    vec![1.0 / d as f64; d as usize]
}

fn inverse_rank(d: u32) -> Vec<f64> {
    let h: f64 = (1..=d).map(|z| 1.0 / z as f64).sum();
    (1..=d).map(|z| 1.0 / (z as f64 * h)).collect()
}

fn table(l1: u32, l2: u32, f: impl Fn(u32, u32) -> f64) -> Vec<f64> {
    (1..=l1)
        .flat_map(|x| (1..=l2).map(move |y| (x, y)))
        .map(|(x, y)| f(x, y))
        .collect()
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|p| *p /= s);
}

fn sign(x: u32, y: u32) -> f64 {
    if (x + y).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `p(x, y) ∝ x⁻² y⁻²`, normalized.
fn power_law(l1: u32, l2: u32) -> Vec<f64> {
    let mut t = table(l1, l2, |x, y| 1.0 / ((x * x) as f64 * (y * y) as f64));
    normalize(&mut t);
    t
}

/// Checkerboard `{1 + s·(-1)^{x+y}} / (ℓ₁ℓ₂)`.
fn checkerboard(l1: u32, l2: u32, s: f64) -> Vec<f64> {
    let n = (l1 * l2) as f64;
    table(l1, l2, |x, y| (1.0 + s * sign(x, y)) / n)
}

/// The eight benchmark alternatives, identified by `1..=8`.
///
/// 1. power-law table with the `(ℓ₁, ℓ₂)` cell raised to 0.015, then renormalized;
/// 2. power-law table with a `±δ` checkerboard on the top-left 2×2 block;
/// 3. diagonal construction with `q = 0.2` (requires `ℓ₁ = ℓ₂`);
/// 4. checkerboard-perturbed uniform;
/// 5. independent 2×2 block at `z = 1`, checkerboard elsewhere;
/// 6. dependent 2×2 block at `z = 1`, uniform elsewhere;
/// 7. `p_Z ∝ 1/z` with checkerboard strength `1/z`;
/// 8. `p_Z ∝ 1/z` with checkerboard strength `1/(d - z + 1)`.
///
/// Scenarios using the checkerboard need `ℓ₁ℓ₂` even to sum to one.
pub fn scenario_pmf(id: u32, l1: u32, l2: u32, d: u32) -> Result<JointPmf> {
    let domain = Domain::new(l1, l2, d).map_err(|e| Error::Config(e.to_string()))?;
    if !(1..=8).contains(&id) {
        return Err(Error::Config(format!("unknown scenario {id}; expected 1 to 8")));
    }
    if l1 < 2 || l2 < 2 {
        return Err(Error::Config(format!("scenario {id} needs l1, l2 >= 2")));
    }
    if matches!(id, 4 | 5 | 7 | 8) && (l1 * l2) % 2 == 1 {
        return Err(Error::Config(format!("scenario {id} needs l1 * l2 to be even")));
    }
    if id == 3 && l1 != l2 {
        return Err(Error::Config("scenario 3 needs l1 == l2".into()));
    }
    let label = format!("scenario-{id}");
    let idx = |x: u32, y: u32| ((x - 1) * l2 + (y - 1)) as usize;
    match id {
        1 => {
            let mut t = power_law(l1, l2);
            t[idx(l1, l2)] = 0.015;
            normalize(&mut t);
            JointPmf::from_conditionals(label, domain, &uniform(d), |_| t.clone())
        }
        2 => {
            let mut t = power_law(l1, l2);
            let delta = [(1, 1), (1, 2), (2, 1), (2, 2)]
                .iter()
                .map(|&(x, y)| t[idx(x, y)])
                .fold(f64::INFINITY, f64::min);
            for (x, y) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
                t[idx(x, y)] += sign(x, y) * delta;
            }
            JointPmf::from_conditionals(label, domain, &uniform(d), |_| t.clone())
        }
        3 => {
            let q = 0.2;
            let inv = 1.0 / (l1 - 1) as f64;
            let mut t = table(l1, l2, |x, y| match (x, y) {
                (1, 1) => (1.0 - q) * (1.0 - q),
                (1, _) | (_, 1) => (1.0 - q) * q * inv,
                _ if x == y => q * q * inv,
                _ => 0.0,
            });
            let total: f64 = t.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                log::warn!("scenario 3 conditional sums to {total}; renormalizing");
                normalize(&mut t);
            }
            JointPmf::from_conditionals(label, domain, &uniform(d), |_| t.clone())
        }
        4 => {
            let t = checkerboard(l1, l2, 1.0);
            JointPmf::from_conditionals(label, domain, &uniform(d), |_| t.clone())
        }
        5 | 6 => {
            let first = table(l1, l2, |x, y| match (x, y, id) {
                (1..=2, 1..=2, 5) => 0.25,
                (1, 1, 6) | (2, 2, 6) => 0.4,
                (1, 2, 6) | (2, 1, 6) => 0.1,
                _ => 0.0,
            });
            let rest = if id == 5 {
                checkerboard(l1, l2, 1.0)
            } else {
                checkerboard(l1, l2, 0.0)
            };
            JointPmf::from_conditionals(label, domain, &uniform(d), |z| {
                if z == 1 {
                    first.clone()
                } else {
                    rest.clone()
                }
            })
        }
        7 => JointPmf::from_conditionals(label, domain, &inverse_rank(d), |z| {
            checkerboard(l1, l2, 1.0 / z as f64)
        }),
        _ => JointPmf::from_conditionals(label, domain, &inverse_rank(d), |z| {
            checkerboard(l1, l2, 1.0 / (d - z + 1) as f64)
        }),
    }
}

/// Hard case for asymptotically calibrated classical tests: a perfectly
/// dependent 2×2 table in every slice, with `Z = 1` for the whole sample with
/// probability `1 - 1/n` while `d` inflates the reference degrees of freedom.
pub fn worst_case_pmf(n: usize, d: u32) -> Result<JointPmf> {
    if n < 2 || d < 2 {
        return Err(Error::Config(format!(
            "worst-case construction needs n >= 2 and d >= 2, got n={n}, d={d}"
        )));
    }
    let domain = Domain::new(2, 2, d)?;
    let n = n as f64;
    let first = (1.0 - 1.0 / n).powf(1.0 / n);
    let rest = (1.0 - first) / (d - 1) as f64;
    let p_z: Vec<f64> = (1..=d).map(|z| if z == 1 { first } else { rest }).collect();
    JointPmf::from_conditionals("worst-case", domain, &p_z, |_| vec![0.5, 0.0, 0.0, 0.5])
}

/// `X` and `Y` independent given `Z`, with marginals that vary with `z`.
pub fn null_pmf(l1: u32, l2: u32, d: u32) -> Result<JointPmf> {
    let domain = Domain::new(l1, l2, d).map_err(|e| Error::Config(e.to_string()))?;
    JointPmf::from_conditionals("null", domain, &uniform(d), |z| {
        let mut px: Vec<f64> = (1..=l1).map(|x| (x + z) as f64).collect();
        let mut py: Vec<f64> = (1..=l2).map(|y| 1.0 / (y + z) as f64).collect();
        normalize(&mut px);
        normalize(&mut py);
        px.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect()
    })
}

/// Alias-table sampler over the support of a [`JointPmf`].
#[derive(Debug, Clone)]
pub struct Sampler {
    support: Vec<(u32, u32, u32)>,
    alias: WeightedAliasIndex<f64>,
    domain: Domain,
}

impl Sampler {
    pub fn new(pmf: &JointPmf) -> Result<Self> {
        let (support, weights): (Vec<_>, Vec<_>) = pmf
            .probs()
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > 0.0)
            .map(|(i, p)| (pmf.coords(i), p))
            .unzip();
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::InvalidInput(format!("cannot sample from pmf: {e}")))?;
        Ok(Self {
            support,
            alias,
            domain: pmf.domain,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Dataset {
        let observations = (0..n)
            .map(|_| Observation::from(self.support[self.alias.sample(rng)]))
            .collect();
        Dataset::new(observations, self.domain).expect("support lies inside the domain")
    }
}

/// Draws `n` i.i.d. observations.
pub fn sample_from<R: Rng + ?Sized>(pmf: &JointPmf, n: usize, rng: &mut R) -> Result<Dataset> {
    Ok(Sampler::new(pmf)?.sample(n, rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub scenario: String,
    pub method: Method,
    pub calibration: Calibration,
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub reps: usize,
    pub rejections: usize,
    pub power: f64,
    pub se: f64,
    pub seed: u64,
}

/// Rejection rate over `reps` independent sample-and-test trials.
///
/// Trial `r` samples from its own stream and tests with a seed derived from
/// `(master_seed, r)`; the plan's own seed is not used.
pub fn estimate_power(
    pmf: &JointPmf,
    n: usize,
    plan: &TestPlan,
    reps: usize,
    master_seed: u64,
) -> Result<PowerEstimate> {
    plan.validate()?;
    if reps < 1 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let sampler = Sampler::new(pmf)?;
    let streams = StreamFactory::new(master_seed, purpose::SAMPLING);
    let rejected: Vec<bool> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.stream((r as u64 >> 32) as u32, r as u32);
            let data = sampler.sample(n, &mut rng);
            let trial = TestPlan {
                seed: derive_seed(master_seed, purpose::TRIAL_SEED, r as u64),
                ..*plan
            };
            run_test(&data, &trial).map(|res| res.decision == Decision::Reject)
        })
        .collect::<Result<_>>()?;
    let rejections = rejected.iter().filter(|&&r| r).count();
    let power = rejections as f64 / reps as f64;
    Ok(PowerEstimate {
        scenario: pmf.label.clone(),
        method: plan.method,
        calibration: plan.calibration,
        n,
        b: if plan.calibration == Calibration::Permutation {
            plan.b
        } else {
            0
        },
        alpha: plan.alpha,
        reps,
        rejections,
        power,
        se: (power * (1.0 - power) / reps as f64).sqrt(),
        seed: master_seed,
    })
}
