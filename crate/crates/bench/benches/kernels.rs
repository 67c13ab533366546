use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qh_bench::{hermitian, oscillator, s1_family, unit_grid};
use qh_core::densemat::{expm, hermitian_eigen, C64};
use qh_core::oscillator::{gamma_solve, FockSpace};
use qh_core::propagator::{evolve_hermitian, evolve_metric};
use qh_core::spinchain::h1;

fn dense(c: &mut Criterion) {
    let mut g = c.benchmark_group("dense");
    for dim in [2, 8, 40, 80] {
        let m = hermitian(dim);
        g.bench_with_input(BenchmarkId::new("hermitian_eigen", dim), &m, |b, m| {
            b.iter(|| hermitian_eigen(black_box(m), 1e-10).unwrap())
        });
        let step = m.scale(C64::new(0.0, -1e-2));
        g.bench_with_input(BenchmarkId::new("expm", dim), &step, |b, s| b.iter(|| expm(black_box(s)).unwrap()));
    }
    g.finish();
}

fn evolution(c: &mut Criterion) {
    let fam = s1_family();
    let grid = unit_grid(1000);
    let rho0 = fam.rho(0.0);
    c.bench_function("evolve_metric/s1_1000_steps", |b| {
        b.iter(|| evolve_metric(|t| Ok(h1(1.0, fam.kappa(t))), black_box(&rho0), &grid, 0.0).unwrap())
    });
    let h = hermitian(8);
    c.bench_function("evolve_hermitian/dim8_1000_steps", |b| {
        b.iter(|| evolve_hermitian(|_| Ok(h.clone()), &grid, 1e-10).unwrap())
    });
}

fn oscillator_kernels(c: &mut Criterion) {
    let params = oscillator(40);
    let grid = unit_grid(1000);
    c.bench_function("gamma_solve/1000_steps", |b| b.iter(|| gamma_solve(black_box(&params), &grid).unwrap()));
    let mut g = c.benchmark_group("dyson_map");
    for dim in [40, 80] {
        let space = FockSpace::new(dim).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(dim), &space, |b, s| {
            b.iter(|| s.dyson_map(black_box(C64::new(0.1, 0.3))))
        });
    }
    g.finish();
}

criterion_group!(benches, dense, evolution, oscillator_kernels);
criterion_main!(benches);
