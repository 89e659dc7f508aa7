use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use metacut::dynamics::integrate_every;
use metacut::{eig_symmetric, search_stable_cuts, SearchMode, StabilityThreshold};
use metacut_bench::{ring_with_chords, three_patch_model};

fn jacobi(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig_symmetric");
    for n in [8, 32, 64] {
        let l = ring_with_chords(n).laplacian();
        group.bench_with_input(BenchmarkId::from_parameter(n), &l, |b, l| {
            b.iter(|| eig_symmetric(black_box(l)).unwrap())
        });
    }
    group.finish();
}

fn search(c: &mut Criterion) {
    let tau = StabilityThreshold::new(0.1).unwrap();
    let mut group = c.benchmark_group("search_stable_cuts");
    group.sample_size(10);
    for n in [10, 14] {
        let g = ring_with_chords(n);
        group.bench_with_input(BenchmarkId::new("exhaustive", n), &g, |b, g| {
            b.iter(|| search_stable_cuts(black_box(g), tau, SearchMode::Exhaustive, 2).unwrap())
        });
    }
    let g = ring_with_chords(100);
    group.bench_function("heuristic/100", |b| {
        b.iter(|| search_stable_cuts(black_box(&g), tau, SearchMode::Heuristic, 2).unwrap())
    });
    group.finish();
}

fn rk4(c: &mut Criterion) {
    let model = three_patch_model();
    let x0 = [1.01, 0.99, 1.0, 0.2, 0.21, 0.19];
    c.bench_function("rk4/three_patch_t100", |b| {
        b.iter(|| integrate_every(&model, black_box(&x0), 100.0, 0.01, 100).unwrap())
    });
}

criterion_group!(benches, jacobi, search, rk4);
criterion_main!(benches);
