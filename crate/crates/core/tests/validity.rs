//! Simulation-level checks of test validity and power.

use ucit_core::rng::{purpose, StreamFactory};
use ucit_core::{estimate_power, null_pmf, run_test, sample_from, scenario_pmf, Calibration, Method, TestPlan};

#[test]
fn null_rejection_rate_near_alpha() {
    let pmf = null_pmf(4, 3, 5).unwrap();
    for method in [Method::Uci, Method::Chi2] {
        let e = estimate_power(&pmf, 150, &TestPlan::permutation(method, 199, 0.05, 0), 2000, 21).unwrap();
        assert!((0.03..=0.07).contains(&e.power), "{method}: {}", e.power);
    }
}

#[test]
fn permutation_pvalues_are_super_uniform() {
    let pmf = null_pmf(3, 4, 4).unwrap();
    let streams = StreamFactory::new(5, purpose::SAMPLING);
    let reps = 1000;
    for method in [Method::Wuci, Method::WuciSplit, Method::G] {
        let pvalues: Vec<f64> = (0..reps)
            .map(|r| {
                let data = sample_from(&pmf, 80, &mut streams.stream(method as u32, r)).unwrap();
                run_test(&data, &TestPlan::permutation(method, 99, 0.05, u64::from(r)))
                    .unwrap()
                    .p_value
            })
            .collect();
        for alpha in [0.01, 0.05, 0.1] {
            let rate = pvalues.iter().filter(|&&p| p <= alpha).count() as f64 / f64::from(reps);
            let se = (alpha * (1.0 - alpha) / f64::from(reps)).sqrt();
            assert!(rate <= alpha + 3.0 * se, "{method} at alpha {alpha}: {rate}");
        }
    }
}

#[test]
fn scenario_four_power_grows_with_n() {
    let pmf = scenario_pmf(4, 20, 20, 10).unwrap();
    let plan = TestPlan::permutation(Method::Uci, 199, 0.05, 0);
    let curve: Vec<_> = [200, 400, 800]
        .iter()
        .map(|&n| estimate_power(&pmf, n, &plan, 1000, 3).unwrap())
        .collect();
    for pair in curve.windows(2) {
        let joint = (pair[0].se.powi(2) + pair[1].se.powi(2)).sqrt();
        assert!(
            pair[1].power >= pair[0].power - 2.0 * joint,
            "{} -> {}",
            pair[0].power,
            pair[1].power
        );
    }
    assert!(curve[2].power > curve[0].power);
}

#[test]
fn asymptotic_chi2_level_under_null() {
    let pmf = null_pmf(3, 3, 4).unwrap();
    let e = estimate_power(&pmf, 2000, &TestPlan::asymptotic(Method::Chi2, 0.05), 1000, 8).unwrap();
    assert_eq!(e.calibration, Calibration::Asymptotic);
    assert!((0.03..=0.07).contains(&e.power), "{}", e.power);
}

#[test]
fn power_independent_of_worker_count() {
    let pmf = scenario_pmf(7, 20, 20, 10).unwrap();
    let plan = TestPlan::permutation(Method::WuciSplit, 49, 0.05, 0);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_power(&pmf, 300, &plan, 64, 77).unwrap())
    };
    let reference = run(1);
    assert_eq!(run(2), reference);
    assert_eq!(run(8), reference);
}
