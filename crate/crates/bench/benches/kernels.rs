use std::hint::black_box;

use commsir::reedfrost::rf_pmf;
use commsir::replicate::stream;
use commsir::sim::{run_multi, run_single};
use commsir::{InfectiousPeriod, ModelParams};
use criterion::{criterion_group, criterion_main, Criterion};

fn single(c: &mut Criterion) {
    let period = InfectiousPeriod::exponential(1.0).unwrap();
    let mut rng = stream(1, 0);
    c.bench_function("run_single n=1000 lambda=2", |b| {
        b.iter(|| run_single(black_box(999), 1, 2.0 / 1000.0, &period, &mut rng))
    });
}

fn multi(c: &mut Criterion) {
    let period = InfectiousPeriod::exponential(1.0).unwrap();
    let params = ModelParams::from_scaled(100, 100, 2.0, 6.0, period).unwrap();
    let mut rng = stream(2, 0);
    c.bench_function("run_multi n=m=100", |b| b.iter(|| run_multi(black_box(&params), &mut rng)));
}

fn reed_frost(c: &mut Criterion) {
    let mut group = c.benchmark_group("rf_pmf");
    for m in [20usize, 100, 300] {
        group.bench_function(format!("m={m}"), |b| b.iter(|| rf_pmf(black_box(m), 0.01).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, single, multi, reed_frost);
criterion_main!(benches);
