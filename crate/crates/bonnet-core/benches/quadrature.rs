//! Parallel vs. sequential grid integration.
//!
//! Every pair in this suite produces bit-identical values (the reduction
//! tree is fixed); the benchmarks measure how much the rayon cell
//! evaluation buys at realistic resolutions. Run with
//! `cargo bench -p bonnet-core`.

use bonnet_core::{euler, models};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn euler_integrals(c: &mut Criterion) {
    let sphere = models::builtin("sphere_round").expect("catalog model");
    let mut group = c.benchmark_group("sphere_euler_integral");
    for resolution in [256usize, 512] {
        group.bench_with_input(
            BenchmarkId::new("parallel", resolution),
            &resolution,
            |b, &r| b.iter(|| sphere.gauss_bonnet(black_box(r)).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", resolution),
            &resolution,
            |b, &r| b.iter(|| sphere.gauss_bonnet_seq(black_box(r)).unwrap()),
        );
    }
    group.finish();

    let product = models::builtin("product_s2xs2").expect("catalog model");
    let mut group = c.benchmark_group("product_euler_integral");
    // Four-dimensional grids: resolution^4 cells, so stay small.
    for resolution in [8usize, 16] {
        group.bench_with_input(
            BenchmarkId::new("parallel", resolution),
            &resolution,
            |b, &r| b.iter(|| product.gauss_bonnet(black_box(r)).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", resolution),
            &resolution,
            |b, &r| b.iter(|| product.gauss_bonnet_seq(black_box(r)).unwrap()),
        );
    }
    group.finish();
}

fn raw_top_form(c: &mut Criterion) {
    let sphere = models::builtin("sphere_round").expect("catalog model");
    let euler = euler::top_euler_form(sphere.bundle(), sphere.connection())
        .expect("rank-2 euler form");
    let mut group = c.benchmark_group("top_form_quadrature");
    for resolution in [256usize, 512] {
        group.bench_with_input(
            BenchmarkId::new("parallel", resolution),
            &resolution,
            |b, &r| b.iter(|| euler.integrate_top_form(black_box(r)).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", resolution),
            &resolution,
            |b, &r| b.iter(|| euler.integrate_top_form_seq(black_box(r)).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, euler_integrals, raw_top_form);
criterion_main!(benches);
