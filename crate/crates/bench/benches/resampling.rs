use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use blockboot_core::harness::{mse_experiment, ExperimentConfig};
use blockboot_core::{
    block_stats, bootstrap_cdf, make_ebc_params, KernelSpec, ProcessModel, RngStream, StationaryProcess,
};

fn series(n: usize) -> Vec<f64> {
    ProcessModel::reference().simulate(n, 42).unwrap().into_values()
}

fn bench_block_stats(c: &mut Criterion) {
    let spec = KernelSpec::epanechnikov();
    let mut group = c.benchmark_group("block_stats");
    for n in [100usize, 1000, 10_000] {
        let x = series(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |bch, x| {
            bch.iter(|| block_stats(black_box(x), 4, 0.8, 1.0, &spec).unwrap())
        });
    }
    group.finish();
}

fn bench_bootstrap_cdf(c: &mut Criterion) {
    let spec = KernelSpec::epanechnikov();
    let x = series(200);
    let stream = RngStream::new(7);
    let mut group = c.benchmark_group("bootstrap_cdf");
    for b in [1usize, 10, 50] {
        let params = make_ebc_params(200, 0.82, b, 4, 0.8, 0.5, 1.5).unwrap();
        group.bench_with_input(BenchmarkId::new("draws_2000_b", b), &params, |bch, p| {
            bch.iter(|| bootstrap_cdf(black_box(&x), p, 3.0, 0.1, 2000, &spec, &stream).unwrap())
        });
    }
    group.finish();
}

fn bench_mse_replications(c: &mut Criterion) {
    let cfg = ExperimentConfig::from_json_str(
        r#"{"n": 100, "h": 1.8, "grid_bl": [[5, 2]], "B": 500, "R": 20, "oracle_R": 1000, "oracle_p": 0.884, "master_seed": 1}"#,
    )
    .unwrap();
    let mut group = c.benchmark_group("mse_experiment");
    group.sample_size(10);
    group.bench_function("one_cell_20_replications", |bch| {
        bch.iter(|| mse_experiment(black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_block_stats, bench_bootstrap_cdf, bench_mse_replications);
criterion_main!(benches);
