use std::hint::black_box;

use argdist_bench::SWEEP_MODULI;
use argdist_core::distribution::{solve_saddle, ModelConfig, RandomEulerProduct, TailMode};
use argdist_core::divisor::{local_factor_quadrature, local_factor_series, ComplexOrder};
use argdist_core::imaginary::log_e_p;
use argdist_core::lvalues::{sweep_with, SweepMethod, SweepOptions};
use argdist_core::primes::primes_up_to;
use argdist_core::special::digamma;
use argdist_core::{build_table, ConstantsBundle};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

fn sieve(c: &mut Criterion) {
    c.bench_function("sieve 1e7", |b| {
        b.iter(|| primes_up_to(black_box(10_000_000)))
    });
}

fn special(c: &mut Criterion) {
    c.bench_function("digamma", |b| b.iter(|| digamma(black_box(0.137))));
    let consts = ConstantsBundle::shared();
    c.bench_function("solve_saddle", |b| {
        b.iter(|| solve_saddle(black_box(3.0), consts))
    });
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for q in SWEEP_MODULI {
        let table = build_table(q).unwrap();
        for method in [SweepMethod::Direct, SweepMethod::Fft] {
            let opts = SweepOptions {
                method,
                ..SweepOptions::default()
            };
            group.bench_with_input(
                BenchmarkId::new(format!("{method:?}"), q),
                &table,
                |b, t| b.iter(|| sweep_with(t, opts).unwrap()),
            );
        }
    }
    group.finish();
}

fn local_factors(c: &mut Criterion) {
    let z1 = ComplexOrder::new(Complex64::new(1.5, 2.0)).unwrap();
    let z2 = z1.conj();
    c.bench_function("local factor series p=101", |b| {
        b.iter(|| local_factor_series(z1, z2, black_box(101), 1.0, 1e-15))
    });
    c.bench_function("local factor quadrature p=101", |b| {
        b.iter(|| local_factor_quadrature(z1, z2, black_box(101), 1.0, 1e-13))
    });
    c.bench_function("log E_p s=100 p=101", |b| {
        b.iter(|| log_e_p(black_box(100.0), 101, 1e-12))
    });
}

fn model(c: &mut Criterion) {
    let mut group = c.benchmark_group("model sample");
    for cutoff in [1000u64, 100_000] {
        let m = RandomEulerProduct::new(ModelConfig {
            prime_cutoff: cutoff,
            samples: 1000,
            seed: 1,
            tail_mode: TailMode::GaussianTail,
        })
        .unwrap();
        let mut i = 0u64;
        group.bench_function(BenchmarkId::from_parameter(cutoff), |b| {
            b.iter(|| {
                i += 1;
                m.sample(i)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sieve, special, sweeps, local_factors, model);
criterion_main!(benches);
