//! The weighted U-statistic family for discrete independence testing.
//!
//! For a sample of `σ ≥ 4` pairs and positive category weights `η`, `υ`,
//! the statistic is the average over all 4-subsets of a symmetrized kernel
//! estimating the weighted squared L₂ distance between `p_XY` and
//! `p_X p_Y`. [`u_statistic`] evaluates it from a sparse contingency table:
//!
//! ```text
//! U = [A₁ + A₂ / ((σ-1)(σ-2)) - 2 A₃ / (σ-2)] / (σ(σ-3))
//! A₁ = Σ_qr (o_qr² - o_qr) / (η_q υ_r)
//! A₂ = Σ_q (o_q+² - o_q+) / η_q · Σ_r (o_+r² - o_+r) / υ_r
//! A₃ = Σ_qr o_qr (o_q+ - 1)(o_+r - 1) / (η_q υ_r)
//! ```
//!
//! Zero cells contribute nothing to any term, so the cost is linear in the
//! number of stored cells. The same quantity is an HSIC-type estimator with
//! the discrete indicator kernel; other kernels are not supported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tables::SparseTable;

/// Positive per-category weights `η` over `[ℓ₁]` and `υ` over `[ℓ₂]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVectors {
    eta: Vec<f64>,
    upsilon: Vec<f64>,
}

impl WeightVectors {
    pub fn new(eta: Vec<f64>, upsilon: Vec<f64>) -> Result<Self> {
        if eta.is_empty() || upsilon.is_empty() {
            return Err(Error::InvalidInput("weight vectors must be non-empty".into()));
        }
        if let Some(w) = eta.iter().chain(&upsilon).find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "weights must be finite and strictly positive, found {w}"
            )));
        }
        Ok(Self { eta, upsilon })
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn upsilon(&self) -> &[f64] {
        &self.upsilon
    }

    /// `η_q` for a 1-based category.
    #[inline]
    pub fn eta_of(&self, q: u32) -> f64 {
        self.eta[(q - 1) as usize]
    }

    /// `υ_r` for a 1-based category.
    #[inline]
    pub fn upsilon_of(&self, r: u32) -> f64 {
        self.upsilon[(r - 1) as usize]
    }
}

/// All-ones weights; with them the weighted statistic is the plain U-statistic.
pub fn unit_weights(l1: u32, l2: u32) -> WeightVectors {
    WeightVectors {
        eta: vec![1.0; l1.max(1) as usize],
        upsilon: vec![1.0; l2.max(1) as usize],
    }
}

/// Linear-time evaluation of the weighted U-statistic from a sparse table.
pub fn u_statistic(table: &SparseTable, weights: &WeightVectors) -> Result<f64> {
    let sigma = table.sigma();
    if sigma < 4 {
        return Err(Error::Domain(format!(
            "the U-statistic needs at least 4 observations, got {sigma}"
        )));
    }
    // With a single observed x (or y) category every kernel term cancels.
    if table.row_margins().len() < 2 || table.col_margins().len() < 2 {
        return Ok(0.0);
    }
    let mut a1 = 0.0;
    let mut a3 = 0.0;
    for cell in table.cells() {
        let (row, col) = table.cell_margins(cell);
        let w = weights.eta_of(cell.x) * weights.upsilon_of(cell.y);
        let o = cell.count as f64;
        a1 += o * (o - 1.0) / w;
        a3 += o * (row as f64 - 1.0) * (col as f64 - 1.0) / w;
    }
    let rows: f64 = table
        .row_margins()
        .iter()
        .map(|&(q, m)| m as f64 * (m as f64 - 1.0) / weights.eta_of(q))
        .sum();
    let cols: f64 = table
        .col_margins()
        .iter()
        .map(|&(r, m)| m as f64 * (m as f64 - 1.0) / weights.upsilon_of(r))
        .sum();
    Ok(combine(sigma as f64, a1, rows * cols, a3))
}

#[inline]
pub(crate) fn combine(sigma: f64, a1: f64, a2: f64, a3: f64) -> f64 {
    (a1 + a2 / ((sigma - 1.0) * (sigma - 2.0)) - 2.0 * a3 / (sigma - 2.0)) / (sigma * (sigma - 3.0))
}

/// A bin split into weight-estimation parts and the evaluation part.
///
/// The first `t₁` observations donate their `x` values, the next `t₂` their
/// `y` values, and the following `2t + 4` form the evaluation sample. Any
/// remaining observations are dropped and counted in `discarded`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitBin {
    pub d_x: Vec<u32>,
    pub d_y: Vec<u32>,
    pub d_xy: Vec<(u32, u32)>,
    pub t: usize,
    pub t1: usize,
    pub t2: usize,
    pub discarded: usize,
}

/// Splits a bin with `σ_m ≥ 8` observations, using `t = ⌊(σ_m - 4)/4⌋`.
pub fn split_bin(d_m: &[(u32, u32)], l1: u32, l2: u32) -> Result<SplitBin> {
    if d_m.len() < 8 {
        return Err(Error::Domain(format!(
            "sample splitting needs at least 8 observations, got {}",
            d_m.len()
        )));
    }
    Ok(split_bin_relaxed(d_m, l1, l2))
}

/// Same as [`split_bin`] but accepts `4 ≤ σ_m < 8`, where `t = 0`: both weight
/// samples are empty and all `σ_m` observations form the evaluation part.
pub(crate) fn split_bin_relaxed(d_m: &[(u32, u32)], l1: u32, l2: u32) -> SplitBin {
    debug_assert!(d_m.len() >= 4);
    let sigma = d_m.len();
    let t = (sigma - 4) / 4;
    let t1 = t.min(l1 as usize);
    let t2 = t.min(l2 as usize);
    let xy_start = t1 + t2;
    let xy_end = if t == 0 { sigma } else { xy_start + 2 * t + 4 };
    SplitBin {
        d_x: d_m[..t1].iter().map(|p| p.0).collect(),
        d_y: d_m[t1..xy_start].iter().map(|p| p.1).collect(),
        d_xy: d_m[xy_start..xy_end].to_vec(),
        t,
        t1,
        t2,
        discarded: sigma - xy_end,
    }
}

/// `η_q = 1 + a_q`, `υ_r = 1 + a'_r` where `a`, `a'` count values in the weight samples.
pub fn weights_from_split(sb: &SplitBin, l1: u32, l2: u32) -> WeightVectors {
    let mut w = unit_weights(l1, l2);
    for &x in &sb.d_x {
        w.eta[(x - 1) as usize] += 1.0;
    }
    for &y in &sb.d_y {
        w.upsilon[(y - 1) as usize] += 1.0;
    }
    w
}

/// Weights without splitting: `η_q = 1 + b_q` with
/// `b_q = min(σ, ℓ₁) / σ · #{i : X_i = q}` and symmetrically for `υ`.
///
/// The cap is `min(σ, ℓ)`; a conditional-expectation motivation would
/// suggest `min(t, ℓ)` instead, but the `σ` form is the one used here.
pub fn weights_no_split(pairs: &[(u32, u32)], l1: u32, l2: u32) -> WeightVectors {
    let mut w = unit_weights(l1, l2);
    let sigma = pairs.len();
    if sigma == 0 {
        return w;
    }
    let fx = sigma.min(l1 as usize) as f64 / sigma as f64;
    let fy = sigma.min(l2 as usize) as f64 / sigma as f64;
    let mut cx = vec![0u64; l1 as usize];
    let mut cy = vec![0u64; l2 as usize];
    for &(x, y) in pairs {
        cx[(x - 1) as usize] += 1;
        cy[(y - 1) as usize] += 1;
    }
    for (e, c) in w.eta.iter_mut().zip(&cx) {
        *e += fx * *c as f64;
    }
    for (u, c) in w.upsilon.iter_mut().zip(&cy) {
        *u += fy * *c as f64;
    }
    w
}

/// `1 + min(σ, ℓ)/σ · count`, the no-split weight of a category seen `count` times.
#[inline]
pub(crate) fn no_split_weight(count: u64, sigma: usize, l: u32) -> f64 {
    1.0 + sigma.min(l as usize) as f64 / sigma as f64 * count as f64
}
