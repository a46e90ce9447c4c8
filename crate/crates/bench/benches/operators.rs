use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use minproj_bench::hypercube_fixture;
use minproj_core::{gamma_star, laplacian, spectrum, GraphContext};

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum");
    for d in [4, 6, 8] {
        let (g, _) = hypercube_fixture(d, 2);
        group.bench_with_input(BenchmarkId::new("hypercube", d), &g, |b, g| {
            b.iter(|| spectrum(&laplacian(black_box(g)), 1e-6).unwrap())
        });
    }
    group.finish();
}

fn gamma(c: &mut Criterion) {
    let mut group = c.benchmark_group("gamma_star");
    for d in [4, 6] {
        let (g, _) = hypercube_fixture(d, 2);
        group.bench_with_input(BenchmarkId::new("hypercube", d), &g, |b, g| {
            b.iter(|| gamma_star(black_box(g)).singular_values())
        });
    }
    group.finish();
}

fn bound(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_bound");
    for n in [2, 8, 16] {
        let (g, t) = hypercube_fixture(6, n);
        let ctx = GraphContext::new(&g);
        group.bench_with_input(BenchmarkId::new("hypercube6", n), &t, |b, t| {
            b.iter(|| ctx.verify_bound(black_box(t), true).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectra, gamma, bound);
criterion_main!(benches);
