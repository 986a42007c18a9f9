//! Sequential baselines against the library's data-parallel paths.
//!
//! Build with `--no-default-features` to run the library paths on the
//! sequential fallback as well.

use std::hint::black_box;

use cavity_rotation::analysis::{
    bifurcation_scan, detuning_sweep, find_critical_detunings, CriticalSearch, DetuningGrid,
};
use cavity_rotation::oracle::{estimate_noise, SamplerConfig};
use cavity_rotation::quadrature::evaluate_point;
use cavity_rotation::{is_parallel, CavityParams, SidebandState};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn mode() -> &'static str {
    if is_parallel() {
        "parallel"
    } else {
        "sequential-fallback"
    }
}

fn reference() -> (CavityParams, SidebandState) {
    (
        CavityParams::from_loss(0.95, 0.003).unwrap(),
        SidebandState::new(0.5, 2.0, 6.0).unwrap(),
    )
}

fn sweep(c: &mut Criterion) {
    let (cav, st) = reference();
    let mut group = c.benchmark_group("sweep");
    for points in [2_001, 20_001] {
        let grid = DetuningGrid::new(-12.0, 12.0, points).unwrap();
        group.bench_with_input(
            BenchmarkId::new("sequential-loop", points),
            &grid,
            |b, grid| {
                b.iter(|| {
                    grid.values()
                        .into_iter()
                        .map(|d| evaluate_point(d, &st, &cav).unwrap().s_r)
                        .sum::<f64>()
                })
            },
        );
        group.bench_with_input(BenchmarkId::new(mode(), points), &grid, |b, grid| {
            b.iter(|| detuning_sweep(black_box(*grid), &st, &cav).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let (cav, st) = reference();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for partitions in [1, 4] {
        let cfg =
            SamplerConfig::new(42, 100_000, st, 0.48, cav.clone()).with_partitions(partitions);
        group.bench_with_input(
            BenchmarkId::new(format!("{}-partitions", mode()), partitions),
            &cfg,
            |b, cfg| b.iter(|| estimate_noise(black_box(cfg)).unwrap()),
        );
    }
    group.finish();
}

fn critical(c: &mut Criterion) {
    let cav = CavityParams::from_loss(0.999, 0.0).unwrap();
    let st = SidebandState::new(0.5, 2.0, 6.0).unwrap();
    let search = CriticalSearch::default();
    let mut group = c.benchmark_group("critical");
    group.sample_size(10);
    group.bench_function(format!("find-{}", mode()), |b| {
        b.iter(|| find_critical_detunings(black_box(&st), &cav, &search).unwrap())
    });
    group.bench_function(format!("bifurcation-{}", mode()), |b| {
        b.iter(|| bifurcation_scan(0.2, 10.0, 50, &st, &cav, &search).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sweep, oracle, critical);
criterion_main!(benches);
