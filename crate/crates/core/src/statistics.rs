//! Aggregate conditional-independence statistics and the χ² reference law.
//!
//! The U-statistic aggregates sum per-bin contributions over bins with at
//! least four observations:
//!
//! * `T    = Σ σ_m U(D_m)` with unit weights,
//! * `T_W  = Σ σ_m ω_m U_W^a(D_m)` with weights from a held-out split,
//! * `T_W† = Σ σ_m ω_m U_W^b(D_m)` with weights from the whole bin,
//!
//! where `ω_m = √(min(σ_m, ℓ₁) min(σ_m, ℓ₂))`. For `T_W`, bins with
//! `4 ≤ σ_m < 8` use `t = 0`: empty weight samples, unit weights, and all
//! observations in the evaluation sample.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::engine::prepare;
use crate::error::{Error, Result};
use crate::method::Method;
use crate::tables::{partition_by_z, BinnedData, Dataset};

pub use crate::engine::omega;

/// A statistic summed over conditional slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStatistic {
    pub method: Method,
    pub value: f64,
    /// Contribution of each evaluated bin, keyed by `z`.
    pub per_bin: BTreeMap<u32, f64>,
    /// Bins left out: `σ_m < 4` for the U-statistics, empty slices for χ²/G.
    pub skipped_bins: Vec<u32>,
    /// Observations dropped by the sample split, per bin (split method only).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub discarded: BTreeMap<u32, usize>,
}

/// Evaluates any supported statistic on already-binned data.
pub fn aggregate(binned: &BinnedData, method: Method) -> AggregateStatistic {
    let prepared = prepare(binned, method);
    AggregateStatistic {
        method,
        value: prepared.observed(),
        per_bin: prepared.bins.iter().map(|b| (b.z, b.observed())).collect(),
        skipped_bins: prepared.skipped,
        discarded: prepared.discarded,
    }
}

pub fn statistic_t(binned: &BinnedData) -> AggregateStatistic {
    aggregate(binned, Method::Uci)
}

pub fn statistic_tw(binned: &BinnedData) -> AggregateStatistic {
    aggregate(binned, Method::WuciSplit)
}

pub fn statistic_tw_dagger(binned: &BinnedData) -> AggregateStatistic {
    aggregate(binned, Method::Wuci)
}

/// Pearson's `Σ (o_qrs - e_qrs)² / e_qrs` with `e_qrs = o_q+s o_+rs / o_++s`.
pub fn chi2_statistic(data: &Dataset) -> AggregateStatistic {
    aggregate(&partition_by_z(data), Method::Chi2)
}

/// `G = 2 Σ o_qrs ln(o_qrs / e_qrs)`, with `0 ln 0 = 0`.
pub fn g_statistic(data: &Dataset) -> AggregateStatistic {
    aggregate(&partition_by_z(data), Method::G)
}

/// Degrees of freedom `(ℓ₁-1)(ℓ₂-1)d` from the declared domain.
pub fn asymptotic_df(l1: u32, l2: u32, d: u32) -> u64 {
    (l1 as u64 - 1) * (l2 as u64 - 1) * d as u64
}

/// Upper tail `P(χ²_df ≥ x)`.
pub fn chi_square_sf(x: f64, df: u64) -> f64 {
    if df == 0 {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0)
}

/// Lower tail `P(χ²_df ≤ x)`.
pub fn chi_square_cdf(x: f64, df: u64) -> f64 {
    if x <= 0.0 || df == 0 {
        return if df == 0 && x >= 0.0 { 1.0 } else { 0.0 };
    }
    gamma_lr(df as f64 / 2.0, x / 2.0)
}

fn chi_square_ln_pdf(x: f64, k: f64) -> f64 {
    (k / 2.0 - 1.0) * x.ln() - x / 2.0 - (k / 2.0) * std::f64::consts::LN_2 - ln_gamma(k / 2.0)
}

/// Inverse CDF of the χ² distribution.
///
/// Starts from the Wilson–Hilferty approximation and refines with Newton
/// steps on whichever tail is smaller, falling back to bisection inside a
/// maintained bracket.
pub fn chi_square_quantile(p: f64, df: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")));
    }
    if df == 0 {
        return Err(Error::Domain("degrees of freedom must be at least 1".into()));
    }
    let k = df as f64;
    let upper = p > 0.5;
    let target = if upper { 1.0 - p } else { p };
    // Residual in the smaller tail; increasing in x for the lower tail and
    // decreasing for the upper tail.
    let resid = |x: f64| {
        if upper {
            target - chi_square_sf(x, df)
        } else {
            chi_square_cdf(x, df) - target
        }
    };

    let z = normal_quantile(p);
    let h = 2.0 / (9.0 * k);
    let mut x = (k * (1.0 - h + z * h.sqrt()).powi(3)).max(1e-300);
    if !x.is_finite() || x <= 0.0 {
        x = k;
    }

    let (mut lo, mut hi) = (0.0f64, x.max(1.0));
    while resid(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if resid(x) >= 0.0 {
        hi = x;
    } else {
        lo = x;
    }
    for _ in 0..200 {
        let r = resid(x);
        if r == 0.0 {
            return Ok(x);
        }
        if r > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let dens = chi_square_ln_pdf(x, k).exp();
        let mut next = if dens > 0.0 && dens.is_finite() {
            x - r / dens
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Standard normal quantile (Acklam's rational approximation), used only as
/// a starting point.
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383_577_518_672_69e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let plow = 0.02425;
    if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}
