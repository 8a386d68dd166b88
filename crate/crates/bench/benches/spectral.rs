//! Benchmarks for the kernels that dominate acceptance-suite runtime: grid
//! construction, fiber-operator assembly, dense symmetric eigensolves, and
//! the low-rank eigenvalue counting route.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use trispec_core::linalg;
use trispec_core::twobody::PairSystem;
use trispec_core::{LatticeCoefficients, Model, TorusGrid};

fn fixture_model() -> Model {
    Model::identical(
        LatticeCoefficients::nearest_neighbor(),
        LatticeCoefficients::zero_range(8.0),
    )
    .unwrap()
}

fn bench_grid_build(c: &mut Criterion) {
    c.bench_function("torus_grid_build_n16", |b| {
        b.iter(|| TorusGrid::new(black_box(16)).unwrap())
    });
}

fn bench_fiber_assembly(c: &mut Criterion) {
    let model = fixture_model();
    let pair = PairSystem::from_model(&model, 0);
    let grid = TorusGrid::new(6).unwrap();
    let k = [0.3, -0.7, 1.1];
    c.bench_function("fiber_matrix_build_n6", |b| {
        b.iter(|| pair.h_matrix(black_box(&grid), black_box(k)))
    });
}

fn bench_dense_eigensolve(c: &mut Criterion) {
    let model = fixture_model();
    let pair = PairSystem::from_model(&model, 0);
    let grid = TorusGrid::new(5).unwrap();
    let matrix = pair.h_matrix(&grid, [0.5, 0.0, -0.25]);
    let mut group = c.benchmark_group("dense");
    group.sample_size(20);
    group.bench_function("symmetric_eigenvalues_125", |b| {
        b.iter(|| linalg::eigenvalues_sym(black_box(&matrix)))
    });
    group.finish();
}

fn bench_counting_route(c: &mut Criterion) {
    let model = fixture_model();
    let pair = PairSystem::from_model(&model, 0);
    let grid = TorusGrid::new(8).unwrap();
    let k = [0.4, 0.9, -1.3];
    c.bench_function("below_count_lowrank_n8", |b| {
        b.iter(|| pair.count_below(black_box(&grid), black_box(k), black_box(-1.5)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_grid_build,
    bench_fiber_assembly,
    bench_dense_eigensolve,
    bench_counting_route
);
criterion_main!(benches);
