use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ultraweyl::deform::{deform_sc, flagship};
use ultraweyl::weyl::{basis_for_symbol, moyal_star, moyal_via_operators, quantize};
use ultraweyl::{Resolution, Theta};
use ultraweyl_bench::symbol;

fn weyl(c: &mut Criterion) {
    let res = Resolution { r: 1, s: 1 };
    let theta = Theta::new(3, 1, 1).unwrap();
    let (f, g) = (symbol(res, 1), symbol(res, 2));
    let basis = basis_for_symbol(3, 1, &theta, res).unwrap();
    let mut group = c.benchmark_group("weyl");
    group.sample_size(10);
    group.bench_function("quantize", |b| {
        b.iter(|| quantize(black_box(&f), &theta, &basis).unwrap())
    });
    group.bench_function("moyal_direct", |b| {
        b.iter(|| moyal_star(black_box(&f), &g, &theta).unwrap())
    });
    group.bench_function("moyal_via_operators", |b| {
        b.iter(|| moyal_via_operators(black_box(&f), &g, &theta).unwrap())
    });
    group.finish();
}

fn deformation(c: &mut Criterion) {
    let alg = flagship();
    let theta = Theta::new(3, 0, 1).unwrap();
    let mut group = c.benchmark_group("deform");
    group.bench_function("deform_sc", |b| {
        b.iter(|| deform_sc(black_box(&alg), &theta).unwrap())
    });
    let def = deform_sc(&alg, &theta).unwrap();
    let sum = vec![ultraweyl::Scalar::one(); alg.dim()];
    group.bench_function("norm", |b| b.iter(|| def.norm(black_box(&sum)).unwrap()));
    group.finish();
}

criterion_group!(benches, weyl, deformation);
criterion_main!(benches);
