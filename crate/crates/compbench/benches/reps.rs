//! Compares the parallel replicate fan-out against the sequential
//! baseline on a small desk-scale workload.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use compbench::bench::{run_reps, run_reps_sequential};

fn bench_reps(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_reps_bbox6");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| run_reps(black_box("bbox6"), 6, 16, 4, 123).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_reps_sequential(black_box("bbox6"), 6, 16, 4, 123).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_reps);
criterion_main!(benches);
