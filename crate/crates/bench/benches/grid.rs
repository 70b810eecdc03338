use std::hint::black_box;

use amplispace_bench::{continuous, packet};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn fourier(c: &mut Criterion) {
    let mut group = c.benchmark_group("momentum_representation");
    for n in [256, 1024, 4096] {
        let psi = packet(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| {
            b.iter(|| continuous::momentum_representation(black_box(psi)).unwrap())
        });
    }
    group.finish();
}

fn phase_space(c: &mut Criterion) {
    let mut group = c.benchmark_group("phase_space");
    for n in [128, 256, 512] {
        let psi = packet(n);
        group.bench_with_input(BenchmarkId::new("build", n), &psi, |b, psi| {
            b.iter(|| continuous::phase_space_from_position(black_box(psi), 0.3, -0.2).unwrap())
        });
        let z = continuous::phase_space_from_position(&psi, 0.3, -0.2).unwrap();
        group.bench_with_input(BenchmarkId::new("marginal_x", n), &z, |b, z| {
            b.iter(|| continuous::marginal_x(black_box(z)).unwrap())
        });
    }
    group.finish();
}

fn evolve(c: &mut Criterion) {
    let psi = packet(1024);
    c.bench_function("evolve_free_1024", |b| {
        b.iter(|| continuous::evolve_free(black_box(&psi), 1.0, 0.5).unwrap())
    });
}

criterion_group!(benches, fourier, phase_space, evolve);
criterion_main!(benches);
