use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lambshift_core::dynamics::{integrate, DipoleArray, DriveSchedule, DriveSegment, MeanFieldState, SimOptions};
use lambshift_core::geometry::ArraySpec;
use lambshift_core::physics::{coupling_matrix, dipole_interaction, green_tensor};
use lambshift_core::{TransitionSpec, Vector3};

fn chain(n: usize, spec: &TransitionSpec) -> Vec<Vector3<f64>> {
    ArraySpec::new(n, 2.0 * spec.wavelength).unwrap().ideal_sites()
}

fn green(c: &mut Criterion) {
    let spec = TransitionSpec::default();
    let r = Vector3::new(0.7e-6, 0.3e-6, -0.2e-6);
    c.bench_function("green_tensor", |b| {
        b.iter(|| green_tensor(black_box(&r), &spec).unwrap())
    });
    c.bench_function("dipole_interaction", |b| {
        b.iter(|| dipole_interaction(black_box(&r), &Vector3::x(), &spec).unwrap())
    });
}

fn couplings(c: &mut Criterion) {
    let spec = TransitionSpec::default();
    let mut group = c.benchmark_group("coupling_matrix");
    for n in [10, 30, 100] {
        let pos = chain(n, &spec);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pos, |b, pos| {
            b.iter(|| coupling_matrix(black_box(pos), &Vector3::x(), &spec).unwrap())
        });
    }
    group.finish();
}

fn trajectory(c: &mut Criterion) {
    let spec = TransitionSpec::default();
    let g = spec.linewidth;
    let mut group = c.benchmark_group("obe_trajectory");
    group.sample_size(20);
    for n in [10, 30] {
        let array = DipoleArray::new(&chain(n, &spec), Vector3::x(), spec).unwrap();
        let schedule = DriveSchedule::single(DriveSegment::rectangular(0.8 * g, -0.2 * g, Vector3::x(), 7e-6)).unwrap();
        let opts = SimOptions::default();
        group.bench_with_input(BenchmarkId::from_parameter(n), &array, |b, array| {
            b.iter(|| integrate(&MeanFieldState::ground(n), &schedule, black_box(array), &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, green, couplings, trajectory);
criterion_main!(benches);
