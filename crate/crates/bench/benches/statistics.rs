use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use ucit_bench::{sparse_pairs, uniform_dataset};
use ucit_core::{build_sparse_table, run_test, u_statistic, unit_weights, Method, TestPlan};

fn u_statistic_scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("u_statistic");
    group.sample_size(10);
    for n in [10_000usize, 100_000, 1_000_000] {
        let pairs = sparse_pairs(n, 1_000_000, 100, 1);
        let w = unit_weights(1_000_000, 1_000_000);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &pairs, |b, pairs| {
            b.iter(|| u_statistic(&build_sparse_table(black_box(pairs)), &w).unwrap())
        });
    }
    group.finish();
}

fn permutation_tests(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_test");
    group.sample_size(10);
    let data = uniform_dataset(4000, 20, 20, 10, 2);
    for m in Method::ALL {
        let plan = TestPlan::permutation(m, 199, 0.05, 3);
        group.bench_function(m.as_str(), |b| b.iter(|| run_test(black_box(&data), &plan).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, u_statistic_scaling, permutation_tests);
criterion_main!(benches);
