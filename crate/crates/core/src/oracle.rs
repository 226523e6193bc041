//! Brute-force kernel averages over all 4-subsets, `O(σ⁴ ℓ₁ ℓ₂)`.
//!
//! These follow the kernel definition literally and serve only to check the
//! linear-time evaluation in [`crate::ustat::u_statistic`].

use crate::error::{Error, Result};
use crate::ustat::{unit_weights, WeightVectors};

const PERMS: [[usize; 4]; 24] = [
    [0, 1, 2, 3],
    [0, 1, 3, 2],
    [0, 2, 1, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
    [0, 3, 2, 1],
    [1, 0, 2, 3],
    [1, 0, 3, 2],
    [1, 2, 0, 3],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [1, 3, 2, 0],
    [2, 0, 1, 3],
    [2, 0, 3, 1],
    [2, 1, 0, 3],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 1, 0, 2],
    [3, 1, 2, 0],
    [3, 2, 0, 1],
    [3, 2, 1, 0],
];

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

// φ_ij(qr) = 1(X_i = q) 1(Y_i = r) - 1(X_i = q) 1(Y_j = r)
fn phi(pairs: &[(u32, u32)], i: usize, j: usize, q: u32, r: u32) -> f64 {
    ind(pairs[i].0 == q) * ind(pairs[i].1 == r) - ind(pairs[i].0 == q) * ind(pairs[j].1 == r)
}

fn kernel(pairs: &[(u32, u32)], idx: [usize; 4], w: &WeightVectors) -> f64 {
    let l1 = w.eta().len() as u32;
    let l2 = w.upsilon().len() as u32;
    let mut total = 0.0;
    for p in PERMS {
        let (a, b, c, d) = (idx[p[0]], idx[p[1]], idx[p[2]], idx[p[3]]);
        for q in 1..=l1 {
            for r in 1..=l2 {
                total += phi(pairs, a, b, q, r) * phi(pairs, c, d, q, r) / (w.eta_of(q) * w.upsilon_of(r));
            }
        }
    }
    total / 24.0
}

/// Average of the weighted kernel over all `C(σ, 4)` index quadruples.
pub fn brute_force_u(pairs: &[(u32, u32)], weights: &WeightVectors) -> Result<f64> {
    let s = pairs.len();
    if s < 4 {
        return Err(Error::Domain(format!("need at least 4 observations, got {s}")));
    }
    let mut sum = 0.0;
    let mut count = 0u64;
    for i in 0..s {
        for j in i + 1..s {
            for k in j + 1..s {
                for l in k + 1..s {
                    sum += kernel(pairs, [i, j, k, l], weights);
                    count += 1;
                }
            }
        }
    }
    Ok(sum / count as f64)
}

/// The unweighted kernel average: every weight is one.
pub fn brute_force_u_unweighted(pairs: &[(u32, u32)], l1: u32, l2: u32) -> Result<f64> {
    brute_force_u(pairs, &unit_weights(l1, l2))
}
