use std::hint::black_box;

use arena_core::information::fisher_matrix;
use arena_core::rng::seeded;
use arena_core::scheduler::{proximity_sample_indices, ProximityConfig};
use arena_core::simulator::{generate_matrices, Strategy, SyntheticWorld};
use arena_core::{fit_bt_mle, SolverConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn world(n: usize) -> SyntheticWorld {
    SyntheticWorld::uniform(n, 400.0, 1400.0, 7, 0.05).unwrap()
}

fn bt_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_bt_mle");
    for n in [20, 100] {
        let w = world(n);
        let m = generate_matrices(&w, Strategy::Uniform, 100 * n, &mut seeded(1)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| fit_bt_mle(black_box(m), &SolverConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn fisher_trace(c: &mut Criterion) {
    let w = world(100);
    let m = generate_matrices(&w, Strategy::Proximity { h: 200.0 }, 50_000, &mut seeded(2)).unwrap();
    c.bench_function("fisher_trace_100", |b| {
        b.iter(|| fisher_matrix(black_box(&w.golden), &m).unwrap().trace_inverse_fim())
    });
}

fn sampling(c: &mut Criterion) {
    let w = world(100);
    let m = generate_matrices(&w, Strategy::Uniform, 20_000, &mut seeded(3)).unwrap();
    let cfg = ProximityConfig {
        sample_size_k: 4,
        ..ProximityConfig::default()
    };
    let mut rng = seeded(4);
    c.bench_function("proximity_sample_100", |b| {
        b.iter(|| proximity_sample_indices(&w.golden, &m, &cfg, &mut rng).unwrap())
    });
}

criterion_group!(benches, bt_fit, fisher_trace, sampling);
criterion_main!(benches);
