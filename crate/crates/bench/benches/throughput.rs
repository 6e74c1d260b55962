use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use twinchi2_bench::{cavity, travelling_wave};
use twinchi2_core::cavity::{default_omega_grid, find_steady_state, linearize, spectrum, BranchHint};
use twinchi2_core::model::SystemKind;
use twinchi2_core::ppsde::{
    run_ensemble, EnsembleConfig, IntegrationGrid, NoiseStream, PhaseSpacePoint, SdeSystem, DEFAULT_STEP, N_NOISES,
};
use num_complex::Complex64;

fn sde_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("sde_step");
    for kind in [SystemKind::CascadedTW, SystemKind::ConcurrentTW] {
        let spec = travelling_wave(kind);
        let system = SdeSystem::new(&spec).unwrap();
        let grid = IntegrationGrid::for_spec(&spec, 0.4, DEFAULT_STEP).unwrap();
        let dt = grid.coordinate_step();
        let start = PhaseSpacePoint::coherent_pumps(Complex64::new(1000.0, 0.0), Complex64::new(1000.0, 0.0));
        let mut noise = NoiseStream::new(1, 0);
        let mut dw = [0.0; N_NOISES];
        group.bench_function(kind.name(), |b| {
            b.iter(|| {
                noise.next_step(&mut dw);
                black_box(system.step(black_box(&start), dt, &dw))
            })
        });
    }
    group.finish();
}

fn ensemble(c: &mut Criterion) {
    let spec = travelling_wave(SystemKind::ConcurrentTW);
    let grid = IntegrationGrid::for_spec(&spec, 0.1, DEFAULT_STEP).unwrap();
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for n in [1_024usize, 4_096] {
        group.throughput(Throughput::Elements((n * grid.n_steps) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| run_ensemble(&spec, &grid, &EnsembleConfig::new(n, 7), &[0.1]).unwrap())
        });
    }
    group.finish();
}

fn cavity_spectrum(c: &mut Criterion) {
    let omegas = default_omega_grid();
    let mut group = c.benchmark_group("cavity_spectrum");
    group.throughput(Throughput::Elements(omegas.len() as u64));
    for (name, kind, eps) in [("cascaded", SystemKind::CascadedCavity, 90.0), ("concurrent", SystemKind::ConcurrentCavity, 45.0)] {
        let spec = cavity(kind, eps);
        let ss = find_steady_state(&spec, BranchHint::Auto).unwrap();
        let lin = linearize(&spec, &ss).unwrap();
        group.bench_function(name, |b| b.iter(|| spectrum(&lin, &spec, black_box(&omegas)).unwrap()));
    }
    group.bench_function("steady_state_above_threshold", |b| {
        let spec = cavity(SystemKind::ConcurrentCavity, 100.0);
        b.iter(|| find_steady_state(black_box(&spec), BranchHint::Auto).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sde_step, ensemble, cavity_spectrum);
criterion_main!(benches);
