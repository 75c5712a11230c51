use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hrris_bench::{coefficients, scene};
use hrris_core::metrics::rate_report;
use hrris_core::optimizer::{build_element_context, optimize, solve_pa, sweep_elements, AoSettings};

fn element_context(c: &mut Criterion) {
    let mut group = c.benchmark_group("element_context");
    for n in [50, 150] {
        let (ch, _) = scene(n, 5, 1);
        let coeffs = coefficients(n, 5);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| build_element_context(black_box(n / 2), &coeffs, &ch, 1e6).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    for n in [50, 100, 150] {
        let (ch, p) = scene(n, 5, 2);
        let budget = p.budget().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter_batched(
                || coefficients(n, 5),
                |mut coeffs| sweep_elements(&mut coeffs, &ch, &budget, 1e-5).unwrap(),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let (ch, p) = scene(100, 5, 3);
    let coeffs = coefficients(100, 5);
    c.bench_function("rate_report/100", |b| b.iter(|| rate_report(&coeffs, &ch, black_box(1e-5)).unwrap()));
    c.bench_function("solve_pa/100", |b| {
        b.iter(|| solve_pa(&coeffs, &ch, p.epsilon, p.channel_uses, black_box(p.pa_max), 1e-10).unwrap())
    });
}

fn full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimize");
    group.sample_size(10);
    for (n, k) in [(50, 0), (100, 5), (150, 20)] {
        let (ch, p) = scene(n, k, 4);
        group.bench_function(format!("N{n}_K{k}"), |b| b.iter(|| optimize(&ch, &p, &AoSettings::default()).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, element_context, sweep, metrics, full_run);
criterion_main!(benches);
