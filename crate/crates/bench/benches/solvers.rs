use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ringflux_core::model::{FluxProgram, ModeWindow, RingPotential, WaveState};
use ringflux_core::spectrum::{band_sweep, build_hamiltonian, eigensolve};
use ringflux_core::{evolve, PropagatorConfig};

fn eigensolver(c: &mut Criterion) {
    let w = ModeWindow::new(-16, 16).unwrap();
    let mut group = c.benchmark_group("eigensolve_33");
    for alpha in [0.0, 0.3, 1.0, 1.5] {
        let h = build_hamiltonian(&RingPotential::reference(0.08, alpha).unwrap(), 0.25, w);
        group.bench_with_input(BenchmarkId::from_parameter(alpha), &h, |b, h| {
            b.iter(|| eigensolve(black_box(h), 1e-12).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let p = RingPotential::reference(0.08, 0.3).unwrap();
    let w = ModeWindow::new(-16, 16).unwrap();
    c.bench_function("band_sweep_101", |b| {
        b.iter(|| band_sweep(black_box(&p), w, 101).unwrap())
    });
}

fn propagation(c: &mut Criterion) {
    let p = RingPotential::reference(0.08, 0.3).unwrap();
    let w = ModeWindow::new(-4, 12).unwrap();
    let flux = FluxProgram::Ramp {
        sigma: 0.003,
        tau0: 0.0,
    };
    let init = WaveState::delta(w, 0).unwrap();
    let cfg = PropagatorConfig::default();
    let mut group = c.benchmark_group("evolve");
    group.sample_size(10);
    group.bench_function("ramp_500", |b| {
        b.iter(|| evolve(black_box(&p), flux, w, &init, (0.0, 500.0), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigensolver, sweep, propagation);
criterion_main!(benches);
