//! Hot-path benchmarks: kernel construction, mutual information at the
//! working truncation, and the per-iteration cost of the prior
//! optimization (which bounds every table row and diagram cell).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use optloss::blahut::{blahut_run, blahut_step, BlahutConfig};
use optloss::diagrams::log_grid;
use optloss::gaussian::optimal_xi;
use optloss::number::{discrete_mi, LossKernel};
use optloss::types::{thermal_prior, ChannelPoint, PhotonDistribution};

fn bench_kernel_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("loss_kernel_new");
    for dim in [50usize, 200, 800] {
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, &dim| {
            b.iter(|| LossKernel::new(black_box(0.55), dim).unwrap());
        });
    }
    group.finish();
}

fn bench_discrete_mi(c: &mut Criterion) {
    let kernel = LossKernel::new(0.55, 200).unwrap();
    let prior = thermal_prior(6.729, 200).unwrap();
    c.bench_function("discrete_mi_dim200", |b| {
        b.iter(|| discrete_mi(black_box(&prior), &kernel).unwrap());
    });
}

fn bench_blahut_step(c: &mut Criterion) {
    let kernel = LossKernel::new(0.4, 200).unwrap();
    let prior = PhotonDistribution::uniform(200).unwrap();
    c.bench_function("blahut_step_dim200", |b| {
        b.iter(|| blahut_step(black_box(&prior), &kernel, 0.15).unwrap());
    });
}

fn bench_blahut_run(c: &mut Criterion) {
    let cfg = BlahutConfig {
        mu: 0.15,
        dim: 200,
        max_iters: 200,
        eps_i_target: 0.0,
        eps_p_target: 0.0,
    };
    let mut group = c.benchmark_group("blahut_run_200_iters");
    group.sample_size(10);
    group.bench_function("eta_0.4_dim200", |b| {
        b.iter(|| blahut_run(black_box(&cfg), 0.4, None).unwrap());
    });
    group.finish();
}

fn bench_optimal_xi(c: &mut Criterion) {
    let grid = log_grid(0.1, 100.0, 1000).unwrap();
    c.bench_function("optimal_xi_1000_points", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for &n in &grid {
                let pt = ChannelPoint::new(0.55, n).unwrap();
                acc += optimal_xi(black_box(pt)).squeeze_photons();
            }
            acc
        });
    });
}

criterion_group!(
    benches,
    bench_kernel_build,
    bench_discrete_mi,
    bench_blahut_step,
    bench_blahut_run,
    bench_optimal_xi
);
criterion_main!(benches);
