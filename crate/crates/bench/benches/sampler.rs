use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use mixmc_bench::{categorical_fixture, gaussian_config, gaussian_fixture};
use mixmc_core::models::{CategoricalModel, GaussianModel, ModelConfig};
use mixmc_core::sampler::{chain_rng, Chain};
use mixmc_core::{Dataset, PartitionState, PriorConfig};

const N: usize = 10_000;

/// One sweep (N steps) from an equilibrated state.
fn gaussian_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("gaussian_sweep");
    group.throughput(Throughput::Elements(N as u64));
    group.sample_size(20);
    for k in [3, 5, 7, 10] {
        let Dataset::Real(x) = gaussian_fixture(k, N, k as u64) else { unreachable!() };
        let width = GaussianModel::default_width(&x, 1.0);
        let model = GaussianModel::new(x, 1.0, width);
        let prior = PriorConfig::default();
        let mut chain = Chain::new(&model, &prior, PartitionState::single_component(N), chain_rng(1, 0));
        for _ in 0..200 * N {
            chain.step();
        }
        group.bench_function(BenchmarkId::from_parameter(k), |b| {
            b.iter(|| {
                for _ in 0..N {
                    chain.step();
                }
                chain.state().k()
            })
        });
    }
    group.finish();
}

fn general_eta_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("gaussian_sweep_general_eta");
    group.throughput(Throughput::Elements(N as u64));
    group.sample_size(20);
    let Dataset::Real(x) = gaussian_fixture(5, N, 5) else { unreachable!() };
    let width = GaussianModel::default_width(&x, 1.0);
    let model = GaussianModel::new(x, 1.0, width);
    for eta in [0.5, 2.0] {
        let prior = PriorConfig { eta, ..PriorConfig::default() };
        let mut chain = Chain::new(&model, &prior, PartitionState::single_component(N), chain_rng(1, 0));
        for _ in 0..200 * N {
            chain.step_general_eta();
        }
        group.bench_function(BenchmarkId::from_parameter(eta), |b| {
            b.iter(|| {
                for _ in 0..N {
                    chain.step_general_eta();
                }
                chain.state().k()
            })
        });
    }
    group.finish();
}

fn categorical_sweep(c: &mut Criterion) {
    let n = 1000;
    let mut group = c.benchmark_group("categorical_sweep");
    group.throughput(Throughput::Elements(n as u64));
    for k in [2, 5, 10] {
        let Dataset::Categorical(data) = categorical_fixture(k, n, k as u64) else { unreachable!() };
        let model = CategoricalModel::new(data, 1.0);
        let prior = PriorConfig::default();
        let mut chain = Chain::new(&model, &prior, PartitionState::single_component(n), chain_rng(1, 0));
        for _ in 0..200 * n {
            chain.step();
        }
        group.bench_function(BenchmarkId::from_parameter(k), |b| {
            b.iter(|| {
                for _ in 0..n {
                    chain.step();
                }
                chain.state().k()
            })
        });
    }
    group.finish();
}

/// Whole runs through the public entry point, including bookkeeping.
fn full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_100_sweeps");
    group.sample_size(10);
    let data = gaussian_fixture(5, N, 5);
    let cfg = gaussian_config(0, 100, 3);
    assert!(matches!(cfg.model, ModelConfig::Gaussian { .. }));
    group.bench_function("k5", |b| b.iter(|| mixmc_core::run(&data, &cfg).unwrap().records.len()));
    group.finish();
}

criterion_group!(benches, gaussian_sweep, general_eta_sweep, categorical_sweep, full_run);
criterion_main!(benches);
