//! Per-bin evaluation shared by the observed statistic and its permutation
//! replicates.
//!
//! Each bin is re-coded to dense local category codes once. A replicate then
//! only reorders the `y` codes of the permutable segment and recounts cells.
//! Cells are always visited in canonical `(x code, y code)` order, so a bin
//! whose permuted table equals the original yields a bit-identical value.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use crate::method::Method;
use crate::tables::BinnedData;
use crate::ustat::{combine, no_split_weight, split_bin_relaxed};

#[derive(Debug, Clone)]
enum Kind {
    /// Weighted U-statistic scaled by `scale`; `a2` is permutation invariant.
    U {
        scale: f64,
        row_inv: Vec<f64>,
        col_inv: Vec<f64>,
        a2: f64,
    },
    Chi2,
    /// `margin_term = σ ln σ - Σ o_q+ ln o_q+ - Σ o_+r ln o_+r`.
    G {
        margin_term: f64,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct PreparedBin {
    pub z: u32,
    xs: Vec<u32>,
    ys: Vec<u32>,
    k1: usize,
    k2: usize,
    row_m: Vec<u64>,
    col_m: Vec<u64>,
    kind: Kind,
    observed: f64,
}

impl PreparedBin {
    /// Whether no rearrangement of `y` can change the table.
    pub fn frozen(&self) -> bool {
        self.ys.len() < 2 || self.k1 < 2 || self.k2 < 2
    }

    pub fn ys(&self) -> &[u32] {
        &self.ys
    }

    pub fn observed(&self) -> f64 {
        self.observed
    }

    /// Contribution of this bin when its permutable `y` codes are `ys`.
    pub fn evaluate(&self, ys: &[u32], scratch: &mut Scratch) -> f64 {
        debug_assert_eq!(ys.len(), self.xs.len());
        // A single row or column makes every statistic vanish identically.
        if self.k1 < 2 || self.k2 < 2 {
            return 0.0;
        }
        let sigma = self.xs.len() as f64;
        match &self.kind {
            Kind::U {
                scale,
                row_inv,
                col_inv,
                a2,
            } => {
                let (mut a1, mut a3) = (0.0, 0.0);
                self.for_each_cell(ys, scratch, |x, y, o| {
                    let w = row_inv[x] * col_inv[y];
                    let o = o as f64;
                    a1 += o * (o - 1.0) * w;
                    a3 += o * (self.row_m[x] as f64 - 1.0) * (self.col_m[y] as f64 - 1.0) * w;
                });
                scale * combine(sigma, a1, *a2, a3)
            }
            Kind::Chi2 => {
                let mut s = 0.0;
                self.for_each_cell(ys, scratch, |x, y, o| {
                    let o = o as f64;
                    s += o * o * sigma / (self.row_m[x] as f64 * self.col_m[y] as f64);
                });
                (s - sigma).max(0.0)
            }
            Kind::G { margin_term } => {
                let mut s = 0.0;
                self.for_each_cell(ys, scratch, |_, _, o| {
                    if o > 1 {
                        let o = o as f64;
                        s += o * o.ln();
                    }
                });
                (2.0 * (s + margin_term)).max(0.0)
            }
        }
    }

    fn for_each_cell(&self, ys: &[u32], scratch: &mut Scratch, mut f: impl FnMut(usize, usize, u64)) {
        let n = self.xs.len();
        let cells = self.k1 * self.k2;
        if cells <= 4 * n + 64 {
            let counts = &mut scratch.dense;
            counts.clear();
            counts.resize(cells, 0);
            for (&x, &y) in self.xs.iter().zip(ys) {
                counts[x as usize * self.k2 + y as usize] += 1;
            }
            for (i, &o) in counts.iter().enumerate() {
                if o > 0 {
                    f(i / self.k2, i % self.k2, o as u64);
                }
            }
        } else {
            // Two stable counting-sort passes (by y, then by x) order the
            // observations canonically in O(n + k1 + k2).
            let Scratch {
                order, tmp, buckets, ..
            } = scratch;
            order.clear();
            order.extend(0..n as u32);
            counting_sort(order, tmp, buckets, self.k2, |i| ys[i as usize] as usize);
            counting_sort(order, tmp, buckets, self.k1, |i| self.xs[i as usize] as usize);
            let mut i = 0;
            while i < n {
                let key = (self.xs[order[i] as usize], ys[order[i] as usize]);
                let mut j = i + 1;
                while j < n && (self.xs[order[j] as usize], ys[order[j] as usize]) == key {
                    j += 1;
                }
                f(key.0 as usize, key.1 as usize, (j - i) as u64);
                i = j;
            }
        }
    }
}

fn counting_sort(
    order: &mut Vec<u32>,
    tmp: &mut Vec<u32>,
    buckets: &mut Vec<usize>,
    k: usize,
    key: impl Fn(u32) -> usize,
) {
    buckets.clear();
    buckets.resize(k + 1, 0);
    for &i in order.iter() {
        buckets[key(i) + 1] += 1;
    }
    for b in 1..=k {
        buckets[b] += buckets[b - 1];
    }
    tmp.clear();
    tmp.resize(order.len(), 0);
    for &i in order.iter() {
        let slot = &mut buckets[key(i)];
        tmp[*slot] = i;
        *slot += 1;
    }
    std::mem::swap(order, tmp);
}

/// Reusable buffers for [`PreparedBin::evaluate`].
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    dense: Vec<u32>,
    order: Vec<u32>,
    tmp: Vec<u32>,
    buckets: Vec<usize>,
    pub ys: Vec<u32>,
}

/// All bins of a dataset prepared for one method.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub bins: Vec<PreparedBin>,
    pub skipped: Vec<u32>,
    pub discarded: BTreeMap<u32, usize>,
}

impl Prepared {
    pub fn observed(&self) -> f64 {
        self.bins.iter().map(PreparedBin::observed).sum()
    }
}

/// Dense first-appearance codes for a sequence of categories.
fn encode(values: impl Iterator<Item = u32>) -> (Vec<u32>, Vec<u32>) {
    let mut index = FxHashMap::default();
    let mut labels = Vec::new();
    let codes = values
        .map(|v| {
            *index.entry(v).or_insert_with(|| {
                labels.push(v);
                labels.len() as u32 - 1
            })
        })
        .collect();
    (codes, labels)
}

fn margins(codes: &[u32], k: usize) -> Vec<u64> {
    let mut m = vec![0u64; k];
    for &c in codes {
        m[c as usize] += 1;
    }
    m
}

fn x_log_x(v: u64) -> f64 {
    if v > 1 {
        let v = v as f64;
        v * v.ln()
    } else {
        0.0
    }
}

/// `√(min(σ, ℓ₁) · min(σ, ℓ₂))`.
pub fn omega(sigma_m: usize, l1: u32, l2: u32) -> f64 {
    ((sigma_m.min(l1 as usize) as f64) * (sigma_m.min(l2 as usize) as f64)).sqrt()
}

pub(crate) fn prepare(binned: &BinnedData, method: Method) -> Prepared {
    let dom = binned.domain();
    let mut bins = Vec::new();
    let mut skipped = Vec::new();
    let mut discarded = BTreeMap::new();
    for (z, pairs) in binned.iter() {
        let sigma_m = pairs.len();
        let min_size = if method.is_classical() { 1 } else { 4 };
        if sigma_m < min_size {
            skipped.push(z);
            continue;
        }
        let (segment, split) = match method {
            Method::WuciSplit => {
                let sb = split_bin_relaxed(pairs, dom.l1, dom.l2);
                if sb.discarded > 0 {
                    discarded.insert(z, sb.discarded);
                }
                (sb.d_xy.clone(), Some(sb))
            }
            _ => (pairs.to_vec(), None),
        };
        let (xs, xlab) = encode(segment.iter().map(|p| p.0));
        let (ys, ylab) = encode(segment.iter().map(|p| p.1));
        let (k1, k2) = (xlab.len(), ylab.len());
        let row_m = margins(&xs, k1);
        let col_m = margins(&ys, k2);
        let kind = match method {
            Method::Chi2 => Kind::Chi2,
            Method::G => {
                let s = segment.len() as u64;
                let margin_term = x_log_x(s)
                    - row_m.iter().map(|&m| x_log_x(m)).sum::<f64>()
                    - col_m.iter().map(|&m| x_log_x(m)).sum::<f64>();
                Kind::G { margin_term }
            }
            Method::Uci | Method::Wuci | Method::WuciSplit => {
                let (row_inv, col_inv, scale): (Vec<f64>, Vec<f64>, f64) = match method {
                    Method::Uci => (vec![1.0; k1], vec![1.0; k2], sigma_m as f64),
                    Method::Wuci => (
                        row_m
                            .iter()
                            .map(|&c| 1.0 / no_split_weight(c, sigma_m, dom.l1))
                            .collect(),
                        col_m
                            .iter()
                            .map(|&c| 1.0 / no_split_weight(c, sigma_m, dom.l2))
                            .collect(),
                        sigma_m as f64 * omega(sigma_m, dom.l1, dom.l2),
                    ),
                    _ => {
                        let sb = split.as_ref().expect("split computed above");
                        let a = tally(&sb.d_x);
                        let b = tally(&sb.d_y);
                        (
                            xlab.iter()
                                .map(|q| 1.0 / (1.0 + *a.get(q).unwrap_or(&0) as f64))
                                .collect(),
                            ylab.iter()
                                .map(|r| 1.0 / (1.0 + *b.get(r).unwrap_or(&0) as f64))
                                .collect(),
                            sigma_m as f64 * omega(sigma_m, dom.l1, dom.l2),
                        )
                    }
                };
                let rows: f64 = row_m
                    .iter()
                    .zip(&row_inv)
                    .map(|(&m, w)| m as f64 * (m as f64 - 1.0) * w)
                    .sum();
                let cols: f64 = col_m
                    .iter()
                    .zip(&col_inv)
                    .map(|(&m, w)| m as f64 * (m as f64 - 1.0) * w)
                    .sum();
                Kind::U {
                    scale,
                    row_inv,
                    col_inv,
                    a2: rows * cols,
                }
            }
        };
        let mut bin = PreparedBin {
            z,
            xs,
            ys,
            k1,
            k2,
            row_m,
            col_m,
            kind,
            observed: 0.0,
        };
        bin.observed = bin.evaluate(&bin.ys.clone(), &mut Scratch::default());
        bins.push(bin);
    }
    Prepared {
        bins,
        skipped,
        discarded,
    }
}

fn tally(values: &[u32]) -> FxHashMap<u32, u64> {
    let mut m = FxHashMap::default();
    for &v in values {
        *m.entry(v).or_insert(0) += 1;
    }
    m
}
