//! Conditional independence tests for discrete data.
//!
//! The crate tests `X ⟂ Y | Z` for categorical `X ∈ [ℓ₁]`, `Y ∈ [ℓ₂]` and
//! `Z ∈ [d]` with U-statistic aggregates calibrated by local permutations,
//! alongside Pearson χ² and G statistics with either permutation or
//! asymptotic calibration. All statistics are evaluated in time linear in
//! the sample size, independent of the declared domain sizes.
//!
//! ```
//! use ucit_core::{run_test, Dataset, Domain, Method, Observation, TestPlan};
//!
//! let obs: Vec<Observation> = (0..80u32)
//!     .map(|i| Observation::new(i % 2 + 1, i % 2 + 1, i / 20 + 1))
//!     .collect();
//! let data = Dataset::new(obs, Domain::new(2, 2, 4).unwrap()).unwrap();
//! let result = run_test(&data, &TestPlan::permutation(Method::Uci, 199, 0.05, 7)).unwrap();
//! assert!(result.p_value <= 0.05);
//! ```

mod engine;
pub mod error;
pub mod method;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod permutation;
pub mod rng;
pub mod simulate;
pub mod statistics;
pub mod tables;
pub mod ustat;

pub use error::{Error, Result};
pub use method::{Calibration, Method};
pub use permutation::{
    empirical_quantile, half_permute, local_permute, permutation_pvalue, run_test, Decision, TestPlan, TestResult,
    DEFAULT_B,
};
pub use simulate::{
    estimate_power, null_pmf, sample_from, scenario_pmf, worst_case_pmf, JointPmf, PowerEstimate, Sampler,
};
pub use statistics::{
    aggregate, asymptotic_df, chi2_statistic, chi_square_cdf, chi_square_quantile, chi_square_sf, g_statistic, omega,
    statistic_t, statistic_tw, statistic_tw_dagger, AggregateStatistic,
};
pub use tables::{build_sparse_table, partition_by_z, BinnedData, Dataset, Domain, Observation, SparseTable};
pub use ustat::{split_bin, u_statistic, unit_weights, weights_from_split, weights_no_split, SplitBin, WeightVectors};
