use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use strichartz_core::propagator::{bump_data, lp_spacetime_norm, min_norm_grid, BumpKind};
use strichartz_core::weyl_kernel::{kernel_coefficients, l4_time_integral, max_time_step, sup_over_x, DEFAULT_OVERSAMPLE};
use strichartz_core::{CutoffProfile, QuadForm};

fn sup(c: &mut Criterion) {
    let chi = CutoffProfile::new();
    let form = QuadForm::sample_generic(1).unwrap();
    let mut group = c.benchmark_group("sup_over_x");
    for n in [8u32, 16, 32] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| sup_over_x(&form, &chi, n, black_box(17.3), DEFAULT_OVERSAMPLE).unwrap())
        });
    }
    group.finish();
}

fn coefficients(c: &mut Criterion) {
    let chi = CutoffProfile::new();
    let form = QuadForm::sample_generic(1).unwrap();
    let weights = chi.weights(32);
    let mut out = vec![Default::default(); weights.len() * weights.len()];
    c.bench_function("kernel_coefficients/32", |b| {
        b.iter(|| kernel_coefficients(&form, &weights, black_box(2.5), &mut out))
    });
}

fn l4(c: &mut Criterion) {
    let chi = CutoffProfile::new();
    let form = QuadForm::sample_generic(1).unwrap();
    let dt = max_time_step(&form, 8);
    let mut group = c.benchmark_group("l4_time_integral");
    group.sample_size(10);
    group.bench_function("N8_T2", |b| {
        b.iter(|| l4_time_integral(&form, &chi, 8, black_box(2.0), dt, 4).unwrap())
    });
    group.finish();
}

fn spacetime_norm(c: &mut Criterion) {
    let form = QuadForm::sample_generic(1).unwrap();
    let f = bump_data(8, BumpKind::IndicatorBall).unwrap();
    let mut group = c.benchmark_group("lp_spacetime_norm");
    group.sample_size(10);
    group.bench_function("N8_p8_T0.1", |b| {
        b.iter(|| lp_spacetime_norm(&form, &f, 8.0, black_box(0.1), min_norm_grid(8), max_time_step(&form, 8)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sup, coefficients, l4, spacetime_norm);
criterion_main!(benches);
