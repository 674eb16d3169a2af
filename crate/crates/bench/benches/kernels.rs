use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dce_core::dressed_me::build_liouvillian;
use dce_core::evolve::Propagator;
use dce_core::model::solve;
use dce_core::{DensityMatrix, FockDims, SystemParams};

fn params(photons: usize, phonons: usize) -> SystemParams {
    SystemParams { dims: FockDims::new(photons, phonons).unwrap(), ..SystemParams::default() }
}

fn diagonalize(c: &mut Criterion) {
    let mut group = c.benchmark_group("diagonalize");
    for (n, m) in [(4, 8), (6, 14)] {
        let p = params(n, m);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{m}")), &p, |b, p| {
            b.iter(|| solve(black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn liouvillian(c: &mut Criterion) {
    let mut group = c.benchmark_group("liouvillian");
    group.sample_size(10);
    for (n, m) in [(3, 6), (4, 8)] {
        let p = params(n, m);
        let eig = solve(&p).unwrap();
        let id = format!("{n}x{m}");
        group.bench_with_input(BenchmarkId::new("assemble", &id), &p, |b, p| {
            b.iter(|| build_liouvillian(&eig, black_box(p)).unwrap())
        });
        let l = build_liouvillian(&eig, &p).unwrap();
        let rho = DensityMatrix::gibbs(&eig, 0.5).unwrap();
        group.bench_with_input(BenchmarkId::new("apply", &id), &rho, |b, rho| b.iter(|| l.apply(black_box(rho.matrix()))));
        let s = l.population_sector().unwrap();
        group.bench_with_input(BenchmarkId::new("expm_step", &id), &s, |b, &s| {
            // a fresh propagator each time so the exponential is not served from cache
            b.iter(|| Propagator::new(&l).step(black_box(s), 0.5))
        });
    }
    group.finish();
}

criterion_group!(benches, diagonalize, liouvillian);
criterion_main!(benches);
