//! Discrete observations, partitioning by the conditioning variable, and
//! sparse two-way contingency tables.
//!
//! Category indices are 1-based everywhere on the public surface. A
//! [`SparseTable`] stores only non-zero cells and margins, so building one
//! costs `O(σ)` time regardless of the declared domain sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observation `(x, y, z)` with 1-based category indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

impl Observation {
    pub fn new(x: u32, y: u32, z: u32) -> Self {
        Self { x, y, z }
    }
}

impl From<(u32, u32, u32)> for Observation {
    fn from((x, y, z): (u32, u32, u32)) -> Self {
        Self { x, y, z }
    }
}

/// Declared domain sizes `(ℓ₁, ℓ₂, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub l1: u32,
    pub l2: u32,
    pub d: u32,
}

impl Domain {
    pub fn new(l1: u32, l2: u32, d: u32) -> Result<Self> {
        if l1 == 0 || l2 == 0 || d == 0 {
            return Err(Error::InvalidInput(format!(
                "domain sizes must be positive, got l1={l1}, l2={l2}, d={d}"
            )));
        }
        Ok(Self { l1, l2, d })
    }
}

/// A validated multiset of observations over a declared domain.
///
/// Duplicates are kept; the original order is preserved because the
/// sample split used by the split-weighted statistic depends on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    observations: Vec<Observation>,
    domain: Domain,
}

impl Dataset {
    /// Validates every observation against the declared domain.
    pub fn new(observations: Vec<Observation>, domain: Domain) -> Result<Self> {
        for (i, o) in observations.iter().enumerate() {
            check_range(i + 1, "x", o.x, domain.l1)?;
            check_range(i + 1, "y", o.y, domain.l2)?;
            check_range(i + 1, "z", o.z, domain.d)?;
        }
        Ok(Self { observations, domain })
    }

    /// Builds a dataset whose missing domain sizes are inferred as the
    /// largest observed index (at least 1). Inferred sizes are logged since
    /// the weighted statistics and asymptotic degrees of freedom depend on them.
    pub fn with_partial_domain(
        observations: Vec<Observation>,
        l1: Option<u32>,
        l2: Option<u32>,
        d: Option<u32>,
    ) -> Result<Self> {
        let max_of = |f: fn(&Observation) -> u32| observations.iter().map(f).max().unwrap_or(1).max(1);
        let resolve = |name: &str, declared: Option<u32>, f: fn(&Observation) -> u32| match declared {
            Some(v) => v,
            None => {
                let v = max_of(f);
                log::info!("{name} not declared; inferred {name} = {v} from the largest observed index");
                v
            }
        };
        let domain = Domain::new(
            resolve("l1", l1, |o| o.x),
            resolve("l2", l2, |o| o.y),
            resolve("d", d, |o| o.z),
        )?;
        Self::new(observations, domain)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

fn check_range(row: usize, field: &'static str, value: u32, max: u32) -> Result<()> {
    if value == 0 || value > max {
        return Err(Error::CategoryOutOfRange { row, field, value, max });
    }
    Ok(())
}

/// Observations grouped by the value of `z`, as `(x, y)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedData {
    bins: Vec<Vec<(u32, u32)>>,
    domain: Domain,
}

impl BinnedData {
    /// Pairs with `z = m` (1-based), in original dataset order.
    pub fn bin(&self, m: u32) -> &[(u32, u32)] {
        &self.bins[(m - 1) as usize]
    }

    /// Iterates `(m, pairs)` in increasing `m`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &[(u32, u32)])> + '_ {
        self.bins.iter().enumerate().map(|(i, b)| (i as u32 + 1, b.as_slice()))
    }

    /// Per-bin sample sizes `σ_m`.
    pub fn sizes(&self) -> Vec<usize> {
        self.bins.iter().map(Vec::len).collect()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(Vec::len).sum()
    }
}

/// Splits a dataset into its `d` conditional slices.
///
/// Range validation happens when the [`Dataset`] is built, so this cannot fail.
pub fn partition_by_z(data: &Dataset) -> BinnedData {
    let domain = data.domain();
    let mut bins = vec![Vec::new(); domain.d as usize];
    for o in data.observations() {
        bins[(o.z - 1) as usize].push((o.x, o.y));
    }
    BinnedData { bins, domain }
}

/// A non-zero cell of a [`SparseTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
    pub count: u64,
    row: usize,
    col: usize,
}

/// Contingency table holding only non-zero counts.
///
/// Cells are sorted by `(x, y)`, row margins by `x` and column margins by
/// `y`. Every sum over them therefore runs in the same order on every run,
/// and point lookups are binary searches.
#[derive(Debug, Clone, Default)]
pub struct SparseTable {
    cells: Vec<Cell>,
    rows: Vec<(u32, u64)>,
    cols: Vec<(u32, u64)>,
    sigma: u64,
}

impl SparseTable {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Non-zero row margins `(q, o_q+)`.
    pub fn row_margins(&self) -> &[(u32, u64)] {
        &self.rows
    }

    /// Non-zero column margins `(r, o_+r)`.
    pub fn col_margins(&self) -> &[(u32, u64)] {
        &self.cols
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn count(&self, x: u32, y: u32) -> u64 {
        self.cells
            .binary_search_by_key(&(x, y), |c| (c.x, c.y))
            .map_or(0, |i| self.cells[i].count)
    }

    pub fn row_margin(&self, x: u32) -> u64 {
        self.rows
            .binary_search_by_key(&x, |r| r.0)
            .map_or(0, |i| self.rows[i].1)
    }

    pub fn col_margin(&self, y: u32) -> u64 {
        self.cols
            .binary_search_by_key(&y, |c| c.0)
            .map_or(0, |i| self.cols[i].1)
    }

    /// Row and column margins of a stored cell.
    pub fn cell_margins(&self, cell: &Cell) -> (u64, u64) {
        (self.rows[cell.row].1, self.cols[cell.col].1)
    }

    /// Expands the table back into a multiset of pairs, grouped by cell.
    pub fn to_pairs(&self) -> Vec<(u32, u32)> {
        self.cells
            .iter()
            .flat_map(|c| std::iter::repeat_n((c.x, c.y), c.count as usize))
            .collect()
    }
}

/// `(shift, width)` of each radix digit; digits never straddle the two
/// 32-bit halves of a packed key.
const DIGITS: [(u32, u32); 6] = [(0, 11), (11, 11), (22, 10), (32, 11), (43, 11), (54, 10)];

/// Stable LSD radix sort. Digits that are zero in every key are skipped, so
/// small category indices cost only a few passes.
fn radix_sort(keys: &mut Vec<u64>) {
    let used = keys.iter().fold(0u64, |acc, &k| acc | k);
    let mut buf = vec![0u64; keys.len()];
    let mut counts = vec![0usize; 1 << 11];
    for (shift, width) in DIGITS {
        let mask = (1u64 << width) - 1;
        if (used >> shift) & mask == 0 {
            continue;
        }
        let digit = |k: u64| ((k >> shift) & mask) as usize;
        counts.fill(0);
        for &k in keys.iter() {
            counts[digit(k)] += 1;
        }
        let mut offset = 0;
        for c in counts.iter_mut() {
            offset += std::mem::replace(c, offset);
        }
        for &k in keys.iter() {
            let d = digit(k);
            buf[counts[d]] = k;
            counts[d] += 1;
        }
        std::mem::swap(keys, &mut buf);
    }
}

/// Column margins sorted by `y`, plus the column slot of every cell.
fn column_margins(cells: &[Cell]) -> (Vec<(u32, u64)>, Vec<usize>) {
    let max_y = cells.iter().map(|c| c.y).max().unwrap_or(0) as usize;
    let total: u64 = cells.iter().map(|c| c.count).sum();
    let mut cols: Vec<(u32, u64)> = Vec::new();
    let mut slot = vec![0usize; cells.len()];
    if max_y as u64 <= total.max(1024) {
        // Dense tally over 0..=max_y, which is O(σ) here.
        let mut tally = vec![0u64; max_y + 1];
        for c in cells {
            tally[c.y as usize] += c.count;
        }
        let mut index = vec![usize::MAX; max_y + 1];
        for (y, &m) in tally.iter().enumerate().filter(|(_, &m)| m > 0) {
            index[y] = cols.len();
            cols.push((y as u32, m));
        }
        for (s, c) in slot.iter_mut().zip(cells) {
            *s = index[c.y as usize];
        }
    } else {
        let mut by_col: Vec<u64> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| (u64::from(c.y) << 32) | i as u64)
            .collect();
        radix_sort(&mut by_col);
        for k in by_col {
            let (y, i) = ((k >> 32) as u32, k as u32 as usize);
            if cols.last().is_none_or(|c| c.0 != y) {
                cols.push((y, 0));
            }
            let col = cols.len() - 1;
            cols[col].1 += cells[i].count;
            slot[i] = col;
        }
    }
    (cols, slot)
}

/// Counts `(x, y)` pairs into a [`SparseTable`] in `O(σ)` time.
///
/// Packed `(x, y)` keys are radix sorted and run-length encoded into cells
/// and row margins; column margins come from a tally over `y`.
pub fn build_sparse_table(pairs: &[(u32, u32)]) -> SparseTable {
    assert!(u32::try_from(pairs.len()).is_ok(), "at most 2^32 - 1 pairs per table");
    let mut keys: Vec<u64> = pairs
        .iter()
        .map(|&(x, y)| (u64::from(x) << 32) | u64::from(y))
        .collect();
    radix_sort(&mut keys);

    let distinct = 1 + keys.windows(2).filter(|w| w[0] != w[1]).count();
    let mut cells = Vec::with_capacity(distinct.min(keys.len()));
    let mut rows: Vec<(u32, u64)> = Vec::new();
    for run in keys.chunk_by(|a, b| a == b) {
        let (x, y, count) = ((run[0] >> 32) as u32, run[0] as u32, run.len() as u64);
        if rows.last().is_none_or(|r| r.0 != x) {
            rows.push((x, 0));
        }
        let row = rows.len() - 1;
        rows[row].1 += count;
        cells.push(Cell {
            x,
            y,
            count,
            row,
            col: 0,
        });
    }

    let (cols, slot) = column_margins(&cells);
    for (cell, col) in cells.iter_mut().zip(slot) {
        cell.col = col;
    }

    SparseTable {
        cells,
        rows,
        cols,
        sigma: pairs.len() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dataset(triples: &[(u32, u32, u32)], l1: u32, l2: u32, d: u32) -> Dataset {
        Dataset::new(
            triples.iter().copied().map(Observation::from).collect(),
            Domain::new(l1, l2, d).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn partition_small() {
        let data = dataset(&[(1, 1, 1), (2, 2, 1), (1, 2, 2)], 2, 2, 2);
        let binned = partition_by_z(&data);
        assert_eq!(binned.bin(1), &[(1, 1), (2, 2)]);
        assert_eq!(binned.bin(2), &[(1, 2)]);
        assert_eq!(binned.sizes(), vec![2, 1]);
    }

    #[test]
    fn partition_empty() {
        let data = dataset(&[], 2, 2, 3);
        assert_eq!(partition_by_z(&data).sizes(), vec![0, 0, 0]);
    }

    #[test]
    fn partition_degenerate_bin() {
        let triples: Vec<_> = (0..1000).map(|i| (i % 3 + 1, i % 2 + 1, 1)).collect();
        let data = dataset(&triples, 3, 2, 5);
        let binned = partition_by_z(&data);
        assert_eq!(binned.sizes(), vec![1000, 0, 0, 0, 0]);
        assert_eq!(binned.total(), 1000);
    }

    #[test]
    fn out_of_range_names_row() {
        let obs = vec![Observation::new(1, 1, 1), Observation::new(1, 3, 1)];
        let err = Dataset::new(obs, Domain::new(2, 2, 1).unwrap()).unwrap_err();
        assert_eq!(
            err,
            Error::CategoryOutOfRange {
                row: 2,
                field: "y",
                value: 3,
                max: 2
            }
        );
        let zero = vec![Observation::new(0, 1, 1)];
        assert!(Dataset::new(zero, Domain::new(2, 2, 1).unwrap()).is_err());
    }

    #[test]
    fn domain_inference() {
        let obs = vec![Observation::new(3, 1, 2), Observation::new(1, 4, 1)];
        let data = Dataset::with_partial_domain(obs, None, Some(6), None).unwrap();
        assert_eq!(data.domain(), Domain { l1: 3, l2: 6, d: 2 });
        let empty = Dataset::with_partial_domain(vec![], None, None, None).unwrap();
        assert_eq!(empty.domain(), Domain { l1: 1, l2: 1, d: 1 });
    }

    #[test]
    fn sparse_table_counts() {
        let t = build_sparse_table(&[(1, 1), (1, 1), (2, 2)]);
        assert_eq!(t.cells().len(), 2);
        assert_eq!(t.count(1, 1), 2);
        assert_eq!(t.count(2, 2), 1);
        assert_eq!(t.count(1, 2), 0);
        assert_eq!(t.row_margin(1), 2);
        assert_eq!(t.row_margin(2), 1);
        assert_eq!(t.col_margin(1), 2);
        assert_eq!(t.col_margin(2), 1);
        assert_eq!(t.sigma(), 3);
    }

    #[test]
    fn sparse_table_sorted_with_large_indices() {
        let pairs = [(70_000, 5), (3, 4_000_000_000), (70_000, 5), (3, 2), (u32::MAX, 1)];
        let t = build_sparse_table(&pairs);
        let cells: Vec<_> = t.cells().iter().map(|c| (c.x, c.y, c.count)).collect();
        assert_eq!(
            cells,
            [(3, 2, 1), (3, 4_000_000_000, 1), (70_000, 5, 2), (u32::MAX, 1, 1)]
        );
        assert_eq!(t.row_margins(), [(3, 2), (70_000, 2), (u32::MAX, 1)]);
        assert_eq!(t.col_margins(), [(1, 1), (2, 1), (5, 2), (4_000_000_000, 1)]);
        let c = t.cells()[2];
        assert_eq!(t.cell_margins(&c), (2, 2));
    }

    #[test]
    fn sparse_table_empty() {
        let t = build_sparse_table(&[]);
        assert!(t.cells().is_empty());
        assert_eq!(t.sigma(), 0);
    }

    #[test]
    fn huge_declared_domain_stays_sparse() {
        let pairs: Vec<_> = (0..100_000u32)
            .map(|i| (1_000_000 - (i % 10), 1 + (i % 10) * 99_999))
            .collect();
        let t = build_sparse_table(&pairs);
        assert_eq!(t.cells().len(), 10);
        assert_eq!(t.sigma(), 100_000);
    }

    proptest! {
        #[test]
        fn margins_and_round_trip(pairs in prop::collection::vec((1u32..6, 1u32..5), 0..200)) {
            let t = build_sparse_table(&pairs);
            let sigma = pairs.len() as u64;
            prop_assert_eq!(t.sigma(), sigma);
            prop_assert_eq!(t.cells().iter().map(|c| c.count).sum::<u64>(), sigma);
            prop_assert_eq!(t.row_margins().iter().map(|r| r.1).sum::<u64>(), sigma);
            prop_assert_eq!(t.col_margins().iter().map(|c| c.1).sum::<u64>(), sigma);
            prop_assert!(t.cells().len() as u64 <= sigma);
            for &(q, m) in t.row_margins() {
                let s: u64 = t.cells().iter().filter(|c| c.x == q).map(|c| c.count).sum();
                prop_assert_eq!(s, m);
            }
            for &(r, m) in t.col_margins() {
                let s: u64 = t.cells().iter().filter(|c| c.y == r).map(|c| c.count).sum();
                prop_assert_eq!(s, m);
            }
            let mut back = t.to_pairs();
            let mut orig = pairs.clone();
            back.sort_unstable();
            orig.sort_unstable();
            prop_assert_eq!(back, orig);
        }
    }
}
