use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use virasoro_bench::{hill_operator, kdv_state, smooth_field, GRID};
use virasoro_flows::euler_flow::step;
use virasoro_flows::hill::monodromy;
use virasoro_flows::spectral::{derivative, multiply_dealiased};
use virasoro_flows::InertiaParams;

fn spectral_kernels(c: &mut Criterion) {
    let f = smooth_field(GRID);
    let g = f.map(|x| x * x);
    c.bench_function("derivative_3", |b| b.iter(|| derivative(black_box(&f), 3)));
    c.bench_function("multiply_dealiased", |b| {
        b.iter(|| multiply_dealiased(black_box(&f), black_box(&g)))
    });
}

fn flow_step(c: &mut Criterion) {
    let s = kdv_state(GRID);
    c.bench_function("kdv_step", |b| b.iter(|| step(InertiaParams::KDV, black_box(&s), 1e-3)));
    c.bench_function("ch_step", |b| b.iter(|| step(InertiaParams::CH, black_box(&s), 1e-3)));
}

fn hill_monodromy(c: &mut Criterion) {
    let op = hill_operator(GRID);
    let mut group = c.benchmark_group("hill");
    group.sample_size(10);
    group.bench_function("monodromy", |b| b.iter(|| monodromy(black_box(&op), 0.0)));
    group.finish();
}

criterion_group!(benches, spectral_kernels, flow_step, hill_monodromy);
criterion_main!(benches);
