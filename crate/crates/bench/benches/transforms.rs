use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ultraweyl::fourier::{fft_fast, fourier, Direction};
use ultraweyl::Backend;
use ultraweyl_bench::grid_input;

// Cell-by-cell closed form against the radix-p path, N = 3^depth cells on Q_3.
fn fourier_paths(c: &mut Criterion) {
    for backend in [Backend::Exact, Backend::Float] {
        let mut group = c.benchmark_group(format!("fourier_{backend:?}").to_lowercase());
        for depth in [2, 4, 6] {
            let f = grid_input(1, depth, backend);
            group.bench_with_input(BenchmarkId::new("closed_form", depth), &f, |b, f| {
                b.iter(|| fourier(black_box(f), Direction::Forward))
            });
            group.bench_with_input(BenchmarkId::new("fft_fast", depth), &f, |b, f| {
                b.iter(|| fft_fast(black_box(f), Direction::Forward))
            });
        }
        group.finish();
    }
}

criterion_group!(benches, fourier_paths);
criterion_main!(benches);
